"""First-order terms, destructive unification, and canonical token streams.

Term representation:

* integers are plain Python ints
* atoms are arity-0 ``Functor`` objects used directly as terms
* compound terms are ``Struct(functor, args)``
* logic variables are mutable ``Var`` cells bound by assignment to ``ref``

Functors are interned, so equality of name/arity is object identity.  That
keeps unification and trie descent on an ``is`` comparison instead of tuple
hashing in the hot path.
"""

from __future__ import annotations

from typing import Iterable, Optional

_FUNCTOR_TABLE: dict[tuple[str, int], "Functor"] = {}


class Functor:
    """Interned (name, arity) pair.  Construct via :func:`functor`."""

    __slots__ = ("name", "arity")

    def __init__(self, name: str, arity: int):
        self.name = name
        self.arity = arity

    def __repr__(self) -> str:
        return f"{self.name}/{self.arity}"


def functor(name: str, arity: int) -> Functor:
    key = (name, arity)
    f = _FUNCTOR_TABLE.get(key)
    if f is None:
        f = Functor(name, arity)
        _FUNCTOR_TABLE[key] = f
    return f


def atom(name: str) -> Functor:
    return functor(name, 0)


class Var:
    __slots__ = ("ref", "name")

    def __init__(self, name: Optional[str] = None):
        self.ref = None
        self.name = name

    def __repr__(self) -> str:
        if self.ref is not None:
            return f"Var({term_to_str(self)})"
        return f"Var({self.name or '_'}@{id(self):#x})"


class Struct:
    __slots__ = ("functor", "args")

    def __init__(self, functor: Functor, args: tuple):
        self.functor = functor
        self.args = args

    def __repr__(self) -> str:
        return term_to_str(self)


Term = object  # int | Functor | Var | Struct; kept loose for speed


class Trail(list):
    """Bindings made since a mark, undone in LIFO order."""

    def mark(self) -> int:
        return len(self)

    def undo_to(self, mark: int) -> None:
        while len(self) > mark:
            self.pop().ref = None


def deref(t):
    while type(t) is Var:
        r = t.ref
        if r is None:
            return t
        t = r
    return t


def bind(v: Var, t, trail: Trail) -> None:
    v.ref = t
    trail.append(v)


def unify(a, b, trail: Trail) -> bool:
    """Destructively unify, recording bindings on ``trail``.

    No occurs check: programs under evaluation are definite clauses over
    finite graphs and never build cyclic terms through the engine.
    """
    stack = [(a, b)]
    while stack:
        x, y = stack.pop()
        x = deref(x)
        y = deref(y)
        if x is y:
            continue
        tx = type(x)
        if tx is Var:
            x.ref = y
            trail.append(x)
            continue
        if type(y) is Var:
            y.ref = x
            trail.append(y)
            continue
        if tx is int:
            if type(y) is int and x == y:
                continue
            return False
        if tx is Functor:
            # interned: distinct objects are distinct atoms
            return False
        if type(y) is not Struct or x.functor is not y.functor:
            return False
        stack.extend(zip(x.args, y.args))
    return True


def term_tokens(t, varmap: Optional[dict] = None) -> tuple:
    """Preorder token stream of a term.

    Tokens are ints (integer leaves), interned Functor objects (atom, or
    compound head whose arity gives the subtree width), and ``('v', k)``
    pairs numbering unbound variables by first appearance.  Two terms are
    variants exactly when their token streams are equal.
    """
    if varmap is None:
        varmap = {}
    out = []
    stack = [t]
    while stack:
        x = deref(stack.pop())
        tx = type(x)
        if tx is Var:
            k = varmap.get(x)
            if k is None:
                k = len(varmap)
                varmap[x] = k
            out.append(("v", k))
        elif tx is Struct:
            out.append(x.functor)
            stack.extend(reversed(x.args))
        else:
            out.append(x)
    return tuple(out)


def tokens_to_term(tokens: Iterable):
    """Rebuild a term from a preorder token stream, with fresh variables."""
    varmap: dict[int, Var] = {}
    frames: list[list] = []  # [functor, collected args]
    result = None
    for tok in tokens:
        tt = type(tok)
        if tt is tuple:
            k = tok[1]
            term = varmap.get(k)
            if term is None:
                term = Var()
                varmap[k] = term
        elif tt is Functor:
            if tok.arity == 0:
                term = tok
            else:
                frames.append([tok, []])
                continue
        else:
            term = tok
        while frames:
            head, args = frames[-1]
            args.append(term)
            if len(args) < head.arity:
                term = None
                break
            frames.pop()
            term = Struct(head, tuple(args))
        if term is not None:
            result = term
    if frames or result is None:
        raise ValueError("malformed token stream")
    return result


def canonicalize(t) -> tuple:
    return term_tokens(t)


def variant(a, b) -> bool:
    return term_tokens(a) == term_tokens(b)


def fresh_copy(t, mapping: Optional[dict] = None):
    """Copy a term replacing each unbound variable consistently with a
    fresh one.  Bound structure is followed, so the copy is independent
    of later bindings to the original."""
    if mapping is None:
        mapping = {}
    t = deref(t)
    tx = type(t)
    if tx is Var:
        v = mapping.get(t)
        if v is None:
            v = Var(t.name)
            mapping[t] = v
        return v
    if tx is Struct:
        return Struct(t.functor, tuple(fresh_copy(a, mapping) for a in t.args))
    return t


_BARE_ATOM_OK = frozenset("abcdefghijklmnopqrstuvwxyz")
_BARE_ATOM_REST = frozenset(
    "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_"
)


def _atom_str(name: str) -> str:
    if name and name[0] in _BARE_ATOM_OK and all(c in _BARE_ATOM_REST for c in name):
        return name
    return "'" + name.replace("\\", "\\\\").replace("'", "\\'") + "'"


def term_to_str(t, var_names: Optional[dict] = None) -> str:
    """Render a term in source syntax.  ``var_names`` maps Var -> display
    name; unmapped unbound variables get ``_G0``, ``_G1``, ... per call."""
    if var_names is None:
        var_names = {}
    fresh = sum(1 for nm in var_names.values() if nm.startswith("_G"))
    parts: list[str] = []
    # worklist of terms and literal glue strings
    stack: list = [t]
    while stack:
        x = stack.pop()
        if type(x) is str:
            parts.append(x)
            continue
        x = deref(x)
        tx = type(x)
        if tx is Var:
            nm = var_names.get(x)
            if nm is None:
                if x.name:
                    nm = x.name
                else:
                    nm = f"_G{fresh}"
                    fresh += 1
                var_names[x] = nm
            parts.append(nm)
        elif tx is int:
            parts.append(str(x))
        elif tx is Functor:
            parts.append(_atom_str(x.name))
        else:
            parts.append(_atom_str(x.functor.name))
            parts.append("(")
            stack.append(")")
            args = x.args
            for i in range(len(args) - 1, -1, -1):
                stack.append(args[i])
                if i:
                    stack.append(",")
    return "".join(parts)
