"""Declaration files: objects, relations, morphisms, predicates and formulas.

A file is a sequence of s-expressions::

    (depth 4)
    (object X (const a b c))
    (relation R0 (X X) ((a b) (b c)))
    (predicate Rplus (mu R (pair X X)
      (or (eq x y) (exists z X (and (rel R0 x z) (later (rel R z y)))))))
    (var x X a)
    (formula (rel Rplus x (at X c)))

Objects are type expressions and may mention earlier objects by name.
Relations and morphisms list their data once for all levels, or per level
with ``(level k ...)`` entries.  A bare formula or type expression as a
top-level form is the subject of the file.
"""

from __future__ import annotations

from . import domain, logic
from . import presheaf as ps
from .sexpr import Symbol, dump, head, parse_all

_FORMULA_HEADS = {"eq", "rel", "holds", "and", "or", "implies", "->", "not", "iff",
                  "exists", "forall", "later"}
_DECL_HEADS = {"depth", "object", "relation", "morphism", "var", "predicate", "formula",
               "type"}


class DeclError(ValueError):
    pass


def label_text(form) -> str:
    if isinstance(form, list):
        return "(" + ",".join(label_text(f) for f in form) + ")"
    return str(form)


def resolve_label(obj: ps.TruncatedPresheaf, k: int, form):
    text = label_text(form)
    for x in obj.level(k):
        if ps.encode_label(x) == text:
            return x
    raise DeclError(f"{text!r} is not an element of level {k}")


class Document:
    """The environment built from a declaration file."""

    def __init__(self, depth: int | None = None):
        self.depth = depth
        self.objects: dict[str, ps.TruncatedPresheaf] = {}
        self.relations: dict[str, ps.Subobject] = {}
        self.morphisms: dict[str, ps.Morphism] = {}
        self.vars: dict[str, tuple] = {}
        self.predicates: dict[str, logic.MuPred] = {}
        self.formulas: list = []
        self.types: list = []

    # -- objects --------------------------------------------------------------

    def _need_depth(self):
        if self.depth is None:
            raise DeclError("no depth given: add (depth n) or pass --depth")
        return self.depth

    def obj(self, form) -> ps.TruncatedPresheaf:
        if isinstance(form, Symbol) and str(form) in self.objects:
            return self.objects[str(form)]
        try:
            e = domain.from_sexpr(form)
            return domain.eval_type(e, self.objects, self._need_depth())
        except domain.TypeExprError as exc:
            raise DeclError(str(exc)) from None

    def type_expr(self, form):
        return domain.from_sexpr(form)

    # -- terms and formulas ---------------------------------------------------

    def term(self, form, scope):
        if isinstance(form, Symbol):
            name = str(form)
            if name in scope:
                return logic.Var(name, scope[name])
            if name in self.vars:
                return logic.Var(name, self.vars[name][0])
            raise DeclError(f"unknown variable {name!r}")
        op = head(form)
        args = form[1:] if isinstance(form, list) else []
        if op in ("at", "point") and len(args) == 2:
            X = self.obj(args[0])
            return logic.At(X, resolve_label(X, X.depth, args[1]))
        if op == "next" and len(args) == 1:
            return logic.Next(self.term(args[0], scope))
        if op == "pair":
            return logic.Pair(tuple(self.term(a, scope) for a in args))
        if op == "app" and args:
            return logic.App(self.morphism(args[0]), tuple(self.term(a, scope) for a in args[1:]))
        raise DeclError(f"not a term: {dump(form)}")

    def morphism(self, form) -> ps.Morphism:
        name = str(form)
        if name in self.morphisms:
            return self.morphisms[name]
        if name == "succ":
            return ps.succ_map(self._need_depth())
        if name == "later-omega":
            return ps.later_omega(self._need_depth())
        raise DeclError(f"unknown morphism {name!r}")

    def formula(self, form, scope=None, rec=None):
        scope = dict(scope or {})
        if isinstance(form, Symbol):
            if str(form) in ("true", "top"):
                return logic.Top()
            if str(form) in ("false", "bot"):
                return logic.Bot()
            raise DeclError(f"not a formula: {form}")
        op = head(form)
        args = form[1:] if isinstance(form, list) else []
        f = lambda a: self.formula(a, scope, rec)  # noqa: E731
        match op:
            case "eq" if len(args) == 2:
                return logic.Eq(self.term(args[0], scope), self.term(args[1], scope))
            case "holds" if len(args) == 1:
                return logic.Holds(self.term(args[0], scope))
            case "rel" if args:
                terms = tuple(self.term(a, scope) for a in args[1:])
                return logic.Rel(self.relation_ref(args[0], rec), terms)
            case "and":
                return logic.conj(*map(f, args))
            case "or":
                return logic.disj(*map(f, args))
            case "implies" | "->" if len(args) == 2:
                return logic.Implies(f(args[0]), f(args[1]))
            case "iff" if len(args) == 2:
                return logic.Iff(f(args[0]), f(args[1]))
            case "not" if len(args) == 1:
                return logic.Not(f(args[0]))
            case "later" if len(args) == 1:
                return logic.Later(f(args[0]))
            case "exists" | "forall" if len(args) == 3 and isinstance(args[0], Symbol):
                X = self.obj(args[1])
                body = self.formula(args[2], {**scope, str(args[0]): X}, rec)
                cls = logic.Exists if op == "exists" else logic.Forall
                return cls(str(args[0]), X, body)
        raise DeclError(f"not a formula: {dump(form)}")

    def relation_ref(self, form, rec):
        name = str(form)
        if rec is not None and name == rec:
            return name
        if name in self.relations:
            return self.relations[name]
        if name in self.predicates:
            return self.predicates[name]
        raise DeclError(f"unknown relation {name!r}")

    def mu_pred(self, form) -> logic.MuPred:
        """``(mu R ((x X) (y Y)) body)`` or ``(mu R (pair X Y) body)``."""
        if head(form) != "mu" or len(form) != 4 or not isinstance(form[1], Symbol):
            raise DeclError(f"expected (mu R params body), got {dump(form)}")
        rec, shape, body = str(form[1]), form[2], form[3]
        if isinstance(shape, list) and shape and all(isinstance(p, list) and len(p) == 2
                                                    and isinstance(p[0], Symbol) for p in shape):
            params = tuple((str(n), self.obj(o)) for n, o in shape)
        else:
            objs = ([self.obj(o) for o in shape[1:]] if head(shape) in ("pair", "prod")
                    else [self.obj(shape)])
            names = []
            _free_term_syms(body, set(), names, self)
            if len(names) != len(objs):
                raise DeclError(f"{rec}: {len(objs)} parameter type(s) but free variables "
                                f"{names}")
            params = tuple(zip(names, objs))
        phi = self.formula(body, dict(params), rec)
        return logic.MuPred(rec, params, phi)

    # -- data -----------------------------------------------------------------

    def _levelled(self, data, build):
        n = self._need_depth()
        if data and all(head(d) == "level" for d in data):
            per = {}
            for d in data:
                per[int(d[1])] = d[2:]
            return [build(k, per.get(k, [])) for k in range(1, n + 1)]
        return [build(k, data) for k in range(1, n + 1)]

    def relation(self, objs, data) -> ps.Subobject:
        amb = objs[0] if len(objs) == 1 else ps.product(*objs)

        def build(k, items):
            out = set()
            for it in items:
                if len(objs) == 1:
                    out.add(resolve_label(objs[0], k, it))
                else:
                    if not isinstance(it, list) or len(it) != len(objs):
                        raise DeclError(f"relation entry {dump(it)} has the wrong arity")
                    out.add(tuple(resolve_label(o, k, x) for o, x in zip(objs, it)))
            return out

        return ps.Subobject(amb, self._levelled(data, build))

    def morphism_data(self, X, Y, data) -> ps.Morphism:
        def build(k, items):
            comp = {}
            for it in items:
                if not isinstance(it, list) or len(it) != 2:
                    raise DeclError(f"morphism entry {dump(it)} must be (x y)")
                comp[resolve_label(X, k, it[0])] = resolve_label(Y, k, it[1])
            return comp

        return ps.Morphism(X, Y, self._levelled(data, build))

    # -- top level ------------------------------------------------------------

    def add(self, form):
        op = head(form)
        args = form[1:] if isinstance(form, list) else []
        match op:
            case "depth":
                if self.depth is None:
                    self.depth = int(args[0])
            case "object":
                self.objects[str(args[0])] = self.obj(args[1])
            case "relation":
                objs = [self.obj(o) for o in args[1]] if isinstance(args[1], list) \
                    else [self.obj(args[1])]
                data = args[2] if len(args) == 3 and not head(args[2]) == "level" else args[2:]
                self.relations[str(args[0])] = self.relation(objs, data)
            case "morphism":
                X, Y = self.obj(args[1]), self.obj(args[2])
                data = args[3] if len(args) == 4 and not head(args[3]) == "level" else args[3:]
                self.morphisms[str(args[0])] = self.morphism_data(X, Y, data)
            case "var":
                X = self.obj(args[1])
                self.vars[str(args[0])] = (X, args[2] if len(args) > 2 else None)
            case "predicate":
                mu = self.mu_pred(args[1])
                self.predicates[str(args[0])] = mu
            case "formula":
                self.formulas.append(args[0])
            case "type":
                self.types.append(domain.from_sexpr(args[0]))
            case "mu" if isinstance(form, list) and len(form) == 4:
                self.predicates[str(form[1])] = self.mu_pred(form)
            case "mu":
                self.types.append(domain.from_sexpr(form))
            case _ if op in _FORMULA_HEADS or form in ("true", "false"):
                self.formulas.append(form)
            case _:
                self.types.append(domain.from_sexpr(form))

    # -- subjects -------------------------------------------------------------

    def env_at(self, n: int) -> dict:
        """Values of declared variables at level ``n``."""
        out = {}
        for name, (X, lbl) in self.vars.items():
            if lbl is None:
                raise DeclError(f"variable {name!r} has no value")
            try:
                out[name] = resolve_label(X, n, lbl)
            except DeclError:
                out[name] = X.restrict(resolve_label(X, X.depth, lbl), X.depth, n)
        return out

    def subject_formula(self):
        if not self.formulas:
            raise DeclError("the file contains no formula")
        return self.formula(self.formulas[-1])

    def subject_predicate(self) -> logic.MuPred:
        if not self.predicates:
            raise DeclError("the file contains no recursive predicate")
        return list(self.predicates.values())[-1]

    def subject_type(self):
        if not self.types:
            raise DeclError("the file contains no type expression")
        return self.types[-1]


def _free_term_syms(form, bound, out, doc):
    """Variables of a raw formula in first-occurrence order."""
    if isinstance(form, Symbol):
        return
    op = head(form)
    args = form[1:] if isinstance(form, list) else []
    if op in ("exists", "forall") and len(args) == 3:
        _free_term_syms(args[2], bound | {str(args[0])}, out, doc)
    elif op in ("eq", "holds"):
        for a in args:
            _term_syms(a, bound, out, doc)
    elif op == "rel":
        for a in args[1:]:
            _term_syms(a, bound, out, doc)
    elif op is not None:
        for a in args:
            _free_term_syms(a, bound, out, doc)


def _term_syms(form, bound, out, doc):
    if isinstance(form, Symbol):
        name = str(form)
        if name not in bound and name not in doc.vars and name not in out:
            out.append(name)
        return
    op = head(form)
    if op in ("at", "point"):
        return
    args = form[2:] if op == "app" else form[1:]
    for a in args:
        _term_syms(a, bound, out, doc)


def load(text: str, depth: int | None = None) -> Document:
    """Read a declaration file.  An explicit ``depth`` overrides ``(depth n)``."""
    forms = parse_all(text)
    doc = Document(depth)
    if doc.depth is None:
        for f in forms:
            if head(f) == "depth":
                doc.depth = int(f[1])
    for f in forms:
        try:
            doc.add(f)
        except (IndexError, TypeError) as exc:
            raise DeclError(f"malformed form {dump(f)}: {exc}") from None
    return doc
