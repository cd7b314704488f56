"""Coupling-constant constraints from residues, and their classification.

The pole structure of the commutation relation forces quadratic relations of
the form ``x * (y - z) = 0`` among the couplings of a classical positive
system.  :func:`residue_constraints` instantiates them and
:func:`classify_arrangement` closes them under equality and nonvanishing,
branching on the remaining zero/nonzero choices and keeping the leaves whose
support is irreducible.

Unknowns are named ``C[i,j]`` for type A, and ``C-[i,j]`` (root
``e_i - e_j``), ``C+[i,j]`` (root ``e_i + e_j``) and ``C[i]`` (root ``e_i``)
for types B and D, with ``1 <= i < j <= n``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Mapping, Sequence

from ._backend import qq, to_str
from .linalg import rank
from .poly import Poly
from .reflection import Arrangement, RootVector, _connected, _is_numeric


class ConstraintError(ValueError):
    """Raised for arrangements outside the classical root shapes."""


@dataclass(frozen=True)
class Equation:
    """``factor * (left - right) = 0``."""

    family: str
    factor: str
    left: str
    right: str

    def __str__(self):
        return f"{self.factor}*({self.left} - {self.right}) = 0"


def _name_pair(kind: str, i: int, j: int, sign: int) -> str:
    i, j = min(i, j), max(i, j)
    if kind == "A":
        return f"C[{i},{j}]"
    return f"C{'+' if sign > 0 else '-'}[{i},{j}]"


def _name_short(i: int) -> str:
    return f"C[{i}]"


def _unknowns(kind: str, n: int) -> list[str]:
    names = []
    for i, j in combinations(range(1, n + 1), 2):
        if kind == "A":
            names.append(_name_pair("A", i, j, -1))
        else:
            names.append(_name_pair(kind, i, j, -1))
            names.append(_name_pair(kind, i, j, 1))
    if kind == "B":
        names.extend(_name_short(i) for i in range(1, n + 1))
    return names


def root_of(name: str, n: int) -> tuple:
    """Root vector (as a tuple of ints) behind an unknown name."""
    body = name[name.index("[") + 1 : -1]
    idx = [int(s) for s in body.split(",")]
    v = [0] * n
    if len(idx) == 1:
        v[idx[0] - 1] = 1
        return tuple(v)
    i, j = idx
    v[i - 1] = 1
    v[j - 1] = 1 if name.startswith("C+") else -1
    return tuple(v)


def _shape_name(r: RootVector, kind: str) -> str:
    nz = [(k, c) for k, c in enumerate(r.coords) if c != 0]
    if len(nz) == 1:
        if kind != "B":
            raise ConstraintError(f"root {r.coords} is a short root, not allowed in type {kind}")
        return _name_short(nz[0][0] + 1)
    if len(nz) == 2:
        (i, a), (j, b) = nz
        if a == -b:
            return _name_pair(kind, i + 1, j + 1, -1)
        if a == b:
            if kind == "A":
                raise ConstraintError(f"root {r.coords} has shape e_i + e_j, not allowed in type A")
            return _name_pair(kind, i + 1, j + 1, 1)
    raise ConstraintError(f"root {r.coords} is not of classical shape")


def detect_kind(arr: Arrangement) -> str:
    """``A`` when every root is ``e_i - e_j``; ``B`` with a short root; ``D`` otherwise."""
    kind = "A"
    for r in arr.roots:
        nz = [c for c in r.coords if c != 0]
        if len(nz) == 1:
            return "B"
        if len(nz) == 2 and nz[0] == nz[1]:
            kind = "D"
        elif not (len(nz) == 2 and nz[0] == -nz[1]):
            raise ConstraintError(f"root {r.coords} is not of classical shape")
    return kind


@dataclass
class ConstraintSystem:
    """Relations among the couplings of a classical positive system.

    ``facts`` records what the input arrangement already fixes: listed roots
    with a coupling are nonzero, numeric couplings carry their value, and for a
    closed arrangement every unlisted root has coupling zero.  ``slots`` are
    the additive normalization constants of the construction; the builders fix
    them to zero, and the solver treats them as eliminated.
    """

    kind: str
    n: int
    unknowns: list
    equations: list
    facts: dict = field(default_factory=dict)
    slots: dict = field(default_factory=dict)

    def family_counts(self) -> dict:
        out: dict = {}
        for e in self.equations:
            out[e.family] = out.get(e.family, 0) + 1
        return out

    def as_polys(self) -> list[Poly]:
        """Each equation as a polynomial in the unknowns (in listed order)."""
        pos = {u: k for k, u in enumerate(self.unknowns)}
        m = len(self.unknowns)
        out = []
        for e in self.equations:
            x = Poly.var(m, pos[e.factor])
            out.append(x * (Poly.var(m, pos[e.left]) - Poly.var(m, pos[e.right])))
        return out

    def ambient_rank(self) -> int:
        return self.n - 1 if self.kind == "A" else self.n


def _canonical(eqs: list[Equation]) -> list[Equation]:
    # x*(y-z) and x*(z-y) are the same relation
    seen = set()
    out = []
    for e in eqs:
        if e.left == e.right:
            continue
        key = (e.factor, frozenset((e.left, e.right)))
        if key not in seen:
            seen.add(key)
            out.append(e)
    return out


def _equations(kind: str, n: int) -> list[Equation]:
    idx = range(1, n + 1)
    eqs: list[Equation] = []
    if kind == "A":
        for i, j in combinations(idx, 2):
            for k in idx:
                if k not in (i, j):
                    c = lambda a, b: _name_pair("A", a, b, -1)
                    eqs.append(Equation("triangle", c(i, j), c(k, i), c(k, j)))
        return _canonical(eqs)
    p = lambda a, b, s: _name_pair(kind, a, b, s)
    for i, j in combinations(idx, 2):
        for k in idx:
            if k in (i, j):
                continue
            for s in (1, -1):
                eqs.append(Equation("minus_factor", p(i, j, -1), p(i, k, s), p(j, k, s)))
            for s in (1, -1):
                eqs.append(Equation("plus_factor", p(i, j, 1), p(i, k, s), p(j, k, -s)))
    if kind == "B":
        for i, j in combinations(idx, 2):
            for s in (1, -1):
                eqs.append(Equation("short_difference", p(i, j, s), _name_short(i), _name_short(j)))
        for i in idx:
            for j in idx:
                if j != i:
                    eqs.append(Equation("short_factor", _name_short(i), p(i, j, 1), p(i, j, -1)))
    return _canonical(eqs)


def _slots(kind: str, n: int) -> dict:
    idx = range(1, n + 1)
    pairs = list(combinations(idx, 2))
    names: list[str] = []
    if kind == "A":
        names += [f"p[{i},{j}]" for i, j in pairs] + [f"q[{i}]" for i in idx]
    else:
        names += [f"alpha[{i},{j}]" for i, j in pairs]
        names += [f"beta[{i},{j}]" for i, j in pairs]
        names += [f"gamma[{i},{j}]" for i, j in pairs]
        names += [f"p[{i},{j}]" for i, j in pairs]
        names += [f"delta[{i}]" for i in idx]
        names += [f"c[{i},{j},{k}]" for i, j, k in combinations(idx, 3)]
    return {s: 0 for s in names}


def residue_constraints(arr: Arrangement, kind: str | None = None, closed: bool = False) -> ConstraintSystem:
    """Instantiate the residue relations for the positive system containing ``arr``.

    Unlisted roots of the ambient system are unknown unless ``closed`` is set,
    in which case their couplings are zero.  A listed root with coupling
    ``None`` is unknown; any other coupling is a nonzero value.
    """
    kind = (kind or detect_kind(arr)).upper()
    if kind not in {"A", "B", "D"}:
        raise ConstraintError(f"unknown type {kind!r}")
    n = arr.nvars
    if n < 2 or (kind == "D" and n < 3):
        raise ConstraintError(f"type {kind} needs a larger n")
    unknowns = _unknowns(kind, n)
    facts: dict = {}
    listed = set()
    for r, c in zip(arr.roots, arr.couplings):
        name = _shape_name(r, kind)
        listed.add(name)
        if c is None:
            continue
        scale = r.squared_norm / qq(RootVector(root_of(name, n)).squared_norm)
        # couplings scale with the squared length of the chosen representative
        facts[name] = c / scale if _is_numeric(c) else c
    if closed:
        for u in unknowns:
            if u not in listed:
                facts[u] = 0
    return ConstraintSystem(kind, n, unknowns, _equations(kind, n), facts, _slots(kind, n))


# ---------------------------------------------------------------------------
# closure under equality and nonvanishing
# ---------------------------------------------------------------------------

_ZERO = "0"


class _Conflict(Exception):
    pass


class _State:
    def __init__(self, names: Sequence[str]):
        self.parent = {u: u for u in names}
        self.parent[_ZERO] = _ZERO
        self.nonzero: set = set()
        self.diseq: set = set()
        self.value: dict = {_ZERO: ("num", qq(0))}

    def copy(self) -> "_State":
        s = _State.__new__(_State)
        s.parent = dict(self.parent)
        s.nonzero = set(self.nonzero)
        s.diseq = set(self.diseq)
        s.value = dict(self.value)
        return s

    def find(self, u):
        root = u
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[u] != root:
            self.parent[u], u = root, self.parent[u]
        return root

    def is_zero(self, u) -> bool:
        return self.find(u) == _ZERO

    def is_nonzero(self, u) -> bool:
        return self.find(u) in self.nonzero

    def distinct(self, u, v) -> bool:
        a, b = self.find(u), self.find(v)
        if a == b:
            return False
        if frozenset((a, b)) in self.diseq:
            return True
        if a == _ZERO:
            return b in self.nonzero
        if b == _ZERO:
            return a in self.nonzero
        va, vb = self.value.get(a), self.value.get(b)
        return va is not None and vb is not None and va[0] == vb[0] == "num" and va[1] != vb[1]

    def union(self, u, v) -> bool:
        a, b = self.find(u), self.find(v)
        if a == b:
            return False
        if self.distinct(a, b):
            raise _Conflict
        if b == _ZERO:
            a, b = b, a
        # keep _ZERO as the representative of its class
        self.parent[b] = a
        if b in self.nonzero:
            self.nonzero.discard(b)
            if a == _ZERO:
                raise _Conflict
            self.nonzero.add(a)
        vb = self.value.pop(b, None)
        if vb is not None:
            va = self.value.get(a)
            if va is None:
                self.value[a] = vb
            elif va != vb and va[0] == vb[0] == "num":
                raise _Conflict
        self.diseq = {frozenset(self.find(x) for x in pair) for pair in self.diseq}
        if any(len(pair) == 1 for pair in self.diseq):
            raise _Conflict
        return True

    def set_nonzero(self, u) -> bool:
        a = self.find(u)
        if a == _ZERO:
            raise _Conflict
        if a in self.nonzero:
            return False
        self.nonzero.add(a)
        return True

    def set_distinct(self, u, v) -> bool:
        a, b = self.find(u), self.find(v)
        if a == b:
            raise _Conflict
        if b == _ZERO:
            return self.set_nonzero(a)
        if a == _ZERO:
            return self.set_nonzero(b)
        key = frozenset((a, b))
        if key in self.diseq:
            return False
        self.diseq.add(key)
        return True

    def set_value(self, u, v):
        if _is_numeric(v):
            v = qq(v)
            if v == 0:
                self.union(u, _ZERO)
                return
            self.set_nonzero(u)
            tag = ("num", v)
        else:
            self.set_nonzero(u)
            tag = ("sym", str(v))
        a = self.find(u)
        old = self.value.get(a)
        if old is not None and old != tag:
            if old[0] == tag[0] == "num":
                raise _Conflict
            return
        self.value[a] = tag


def _propagate(st: _State, eqs: Sequence[Equation]) -> list[Equation]:
    """Apply forced consequences until nothing changes; return open equations."""
    changed = True
    while changed:
        changed = False
        open_eqs = []
        for e in eqs:
            if st.find(e.left) == st.find(e.right) or st.is_zero(e.factor):
                continue
            if st.is_nonzero(e.factor):
                changed |= st.union(e.left, e.right)
            elif st.distinct(e.left, e.right):
                changed |= st.union(e.factor, _ZERO)
            else:
                open_eqs.append(e)
        eqs = open_eqs
    # merge classes that carry the same symbolic or numeric value
    by_tag: dict = {}
    for root, tag in list(st.value.items()):
        if st.find(root) != root:
            continue
        if tag in by_tag and by_tag[tag] != root:
            st.union(by_tag[tag], root)
            return _propagate(st, eqs)
        by_tag[tag] = root
    return eqs


@dataclass
class Seed:
    """Assumptions added before closure."""

    nonzero: list = field(default_factory=list)
    zero: list = field(default_factory=list)
    equal: list = field(default_factory=list)
    distinct: list = field(default_factory=list)

    @classmethod
    def coerce(cls, seed) -> "Seed":
        if seed is None:
            return cls()
        if isinstance(seed, Seed):
            return seed
        if isinstance(seed, str):
            return cls(nonzero=[seed])
        if isinstance(seed, Mapping):
            unknown = set(seed) - {"nonzero", "zero", "equal", "distinct"}
            if unknown:
                raise ConstraintError(f"unknown seed keys {sorted(unknown)}")
            return cls(
                nonzero=list(seed.get("nonzero", [])),
                zero=list(seed.get("zero", [])),
                equal=[list(p) for p in seed.get("equal", [])],
                distinct=[list(p) for p in seed.get("distinct", [])],
            )
        return cls(nonzero=list(seed))

    def names(self) -> set:
        out = set(self.nonzero) | set(self.zero)
        for pair in self.equal + self.distinct:
            out |= set(pair)
        return out


@dataclass
class Verdict:
    """Outcome of classification.

    ``status`` is ``full_positive_system``, ``contradiction`` or
    ``ambiguous``.  For a full system ``root_type`` names it and ``couplings``
    maps each unknown to a shared label (``C`` for long roots, ``C0`` for
    short ones, ``0`` for vanishing).  ``B|D`` means both survive: the short
    coupling ``C0`` is either nonzero (``B``) or zero (``D``).  For a contradiction ``reason`` is
    ``a_type_contradiction``, ``fails_I2``, ``fails_I1`` or ``inconsistent``.
    """

    status: str
    root_type: str | None = None
    reason: str | None = None
    couplings: dict = field(default_factory=dict)
    values: dict = field(default_factory=dict)
    leaves: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "root_type": self.root_type,
            "reason": self.reason,
            "couplings": dict(sorted(self.couplings.items())),
            "values": dict(sorted(self.values.items())),
            "leaves": dict(sorted(self.leaves.items())),
        }


def _is_a_type(support: Sequence[tuple], n: int) -> bool:
    """Support equals ``{e_i - e_j}`` up to sign changes of coordinates."""
    if len(support) != n * (n - 1) // 2:
        return False
    if any(sum(1 for c in r if c) != 2 for r in support):
        return False
    for signs in product((1, -1), repeat=n - 1):
        s = (1,) + signs
        ok = True
        for r in support:
            i, j = [k for k, c in enumerate(r) if c]
            if r[i] * s[i] != -r[j] * s[j]:
                ok = False
                break
        if ok:
            return True
    return False


def _leaf_kind(cs: ConstraintSystem, st: _State) -> tuple[str, dict]:
    n = cs.n
    support = [u for u in cs.unknowns if not st.is_zero(u)]
    vecs = [root_of(u, n) for u in support]
    labels: dict = {}
    if not support:
        return "fails_I1", labels
    if cs.kind != "A" and _is_a_type(vecs, n):
        return "a_type", labels
    if rank([list(v) for v in vecs]) < cs.ambient_rank():
        return "fails_I1", labels
    if not _connected([RootVector(v) for v in vecs]):
        return "fails_I2", labels
    long_ = [u for u in cs.unknowns if "," in u]
    short = [u for u in cs.unknowns if "," not in u]
    long_classes = {st.find(u) for u in long_}
    if len(support) != len(long_) + sum(1 for u in short if not st.is_zero(u)):
        return "other", labels
    if len(long_classes) != 1:
        return "other", labels
    for u in long_:
        labels[u] = "C"
    if cs.kind == "A":
        return "A", labels
    short_nz = [u for u in short if not st.is_zero(u)]
    if not short_nz:
        for u in short:
            labels[u] = "0"
        return "D", labels
    if len(short_nz) == n and len({st.find(u) for u in short_nz}) == 1:
        for u in short:
            labels[u] = "C0"
        return "B", labels
    return "other", labels


def _leaves(cs: ConstraintSystem, st: _State, eqs: list, out: list):
    try:
        eqs = _propagate(st, eqs)
    except _Conflict:
        return
    if eqs:
        branch_on = eqs[0].factor
    else:
        undecided = [u for u in cs.unknowns if not st.is_zero(u) and not st.is_nonzero(u)]
        if not undecided:
            out.append(st)
            return
        branch_on = undecided[0]
    for choice in ("nonzero", "zero"):
        child = st.copy()
        try:
            if choice == "nonzero":
                child.set_nonzero(branch_on)
            else:
                child.union(branch_on, _ZERO)
        except _Conflict:
            continue
        _leaves(cs, child, list(eqs), out)


def _class_value(st: _State, u: str):
    tag = st.value.get(st.find(u))
    if tag is None:
        return None
    return to_str(tag[1]) if tag[0] == "num" else tag[1]


def classify_arrangement(cs: ConstraintSystem, seed=None) -> Verdict:
    """Close the relations under the seed and report the surviving structure.

    Every consistent assignment of zero/nonzero is enumerated; assignments
    whose support is reducible or does not span are discarded, while a
    support that is an ``A``-type system inside a ``B``/``D`` ambient is
    reported as a contradiction.
    """
    seed = Seed.coerce(seed)
    bad = seed.names() - set(cs.unknowns)
    if bad:
        raise ConstraintError(f"seed mentions unknowns not in the system: {sorted(bad)}")
    st = _State(cs.unknowns)
    try:
        for u, v in cs.facts.items():
            st.set_value(u, v)
        for u in seed.nonzero:
            st.set_nonzero(u)
        for u in seed.zero:
            st.union(u, _ZERO)
        for a, b in seed.equal:
            st.union(a, b)
        for a, b in seed.distinct:
            st.set_distinct(a, b)
    except _Conflict:
        return Verdict("contradiction", reason="inconsistent", leaves={"inconsistent": 1})

    found: list[_State] = []
    _leaves(cs, st, list(cs.equations), found)
    tally: dict = {}
    full = []
    for leaf in found:
        kind, labels = _leaf_kind(cs, leaf)
        tally[kind] = tally.get(kind, 0) + 1
        if kind in {"A", "B", "D"}:
            full.append((kind, labels, leaf))

    if full:
        kinds = {k for k, _, _ in full}
        if "other" not in tally and (len(kinds) == 1 or kinds == {"B", "D"}):
            # in a B ambient the short coupling may vanish, giving D
            kind, labels, leaf = next(f for f in full if f[0] == max(kinds))
            if len(kinds) == 2:
                kind = "B|D"
            values = {}
            for lab in ("C", "C0"):
                members = [u for u, v in labels.items() if v == lab]
                if members:
                    val = _class_value(leaf, members[0])
                    if val is not None:
                        values[lab] = val
            return Verdict("full_positive_system", kind, None, labels, values, tally)
        return Verdict("ambiguous", None, None, {}, {}, tally)
    if "other" in tally:
        return Verdict("ambiguous", None, None, {}, {}, tally)
    for reason, key in (("a_type_contradiction", "a_type"), ("fails_I2", "fails_I2"), ("fails_I1", "fails_I1")):
        if key in tally:
            return Verdict("contradiction", None, reason, {}, {}, tally)
    return Verdict("contradiction", None, "inconsistent", {}, {}, tally)
