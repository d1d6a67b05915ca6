"""Index-set and access-policy algebra.

Two independent concerns live here:

* progression-free / double-free integer sets, which index the cross
  terms of the common reference string, together with the f(i,j) = d_i +
  d_j cross-index map;

* compilation of monotone boolean policies (``and`` / ``or`` over
  attribute names) to a linear secret sharing matrix, plus the solver for
  reconstruction coefficients over Z_p.

The set construction is a deterministic greedy search: desk-scale slot
counts only need correctness, not asymptotically optimal density.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional


class PolicyError(ValueError):
    """Malformed policy text or attribute outside the universe."""


# ----------------------------------------------------------------------
# Progression-free / double-free sets
# ----------------------------------------------------------------------


def verify_set(d: list[int]) -> bool:
    """Brute-force oracle for both set conditions.

    Rejects the set when a pairwise sum of two distinct elements equals a
    doubled element (which subsumes three-term arithmetic progressions:
    the midpoint of x and y is a third element), or when any element is
    exactly twice another (its double would otherwise surface in the
    published cross terms).
    """
    if not d or len(set(d)) != len(d) or any(v <= 0 for v in d):
        return False
    elems = set(d)
    if any(2 * x in elems for x in d):
        return False
    n = len(d)
    for i in range(n):
        for j in range(i + 1, n):
            s = d[i] + d[j]
            if s % 2 == 0 and s // 2 in elems:
                return False
    return True


@dataclass(frozen=True)
class ProgressionFreeSet:
    """Strictly increasing positive integers, progression- and double-free."""

    d: tuple[int, ...]

    def __post_init__(self):
        if not self.d:
            raise ValueError("set must be nonempty")
        if not verify_set(list(self.d)):
            raise ValueError("set violates the progression-free/double-free conditions")

    def __len__(self):
        return len(self.d)

    @property
    def d_max(self) -> int:
        return self.d[-1]

    def element(self, i: int) -> int:
        """1-based accessor matching slot indexing."""
        return self.d[i - 1]


def build_progression_free_set(length: int) -> ProgressionFreeSet:
    """Greedy smallest-first construction of a valid set of the given size.

    Deterministic, and prefix-stable: the set for L is a prefix of the
    set for any larger L.
    """
    if length < 1:
        raise ValueError("length must be >= 1")
    chosen: list[int] = []
    members: set[int] = set()
    doubles: set[int] = set()
    pair_sums: set[int] = set()
    candidate = 1
    while len(chosen) < length:
        ok = (
            candidate not in doubles
            and 2 * candidate not in members
            and 2 * candidate not in pair_sums
            and all((x + candidate) % 2 or (x + candidate) // 2 not in members for x in chosen)
        )
        if ok:
            pair_sums.update(x + candidate for x in chosen)
            chosen.append(candidate)
            members.add(candidate)
            doubles.add(2 * candidate)
        candidate += 1
    return ProgressionFreeSet(tuple(chosen))


@dataclass(frozen=True)
class CrossIndexSet:
    """The set E = {d_i + d_j : i != j} with the (i, j) -> f(i, j) map."""

    pf_set: ProgressionFreeSet

    def f(self, i: int, j: int) -> int:
        if i == j:
            raise ValueError("cross index requires i != j")
        return self.pf_set.element(i) + self.pf_set.element(j)

    @property
    def values(self) -> tuple[int, ...]:
        length = len(self.pf_set)
        return tuple(sorted({
            self.f(i, j)
            for i in range(1, length + 1)
            for j in range(1, length + 1)
            if i != j
        }))


# ----------------------------------------------------------------------
# Monotone policies
# ----------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(\(|\)|[A-Za-z0-9_]+)")


@dataclass(frozen=True)
class Leaf:
    attr: str


@dataclass(frozen=True)
class Gate:
    op: str  # "and" | "or"
    left: "Node"
    right: "Node"


Node = Leaf | Gate


@dataclass(frozen=True)
class AccessPolicy:
    """Monotone formula over attribute names."""

    root: Node

    def leaves(self) -> list[str]:
        out: list[str] = []

        def walk(node: Node):
            if isinstance(node, Leaf):
                out.append(node.attr)
            else:
                walk(node.left)
                walk(node.right)

        walk(self.root)
        return out

    def attributes(self) -> set[str]:
        return set(self.leaves())

    def satisfied_by(self, attrs: set[str]) -> bool:
        def walk(node: Node) -> bool:
            if isinstance(node, Leaf):
                return node.attr in attrs
            if node.op == "and":
                return walk(node.left) and walk(node.right)
            return walk(node.left) or walk(node.right)

        return walk(self.root)


def parse_policy(text: str) -> AccessPolicy:
    """Parse ``attr``, infix ``and`` / ``or`` (or binds weaker), parentheses."""
    tokens: list[str] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            if text[pos:].strip():
                raise PolicyError(f"bad policy syntax near {text[pos:pos + 10]!r}")
            break
        tokens.append(m.group(1))
        pos = m.end()
    if not tokens:
        raise PolicyError("empty policy")

    idx = 0

    def peek() -> Optional[str]:
        return tokens[idx] if idx < len(tokens) else None

    def eat() -> str:
        nonlocal idx
        tok = tokens[idx]
        idx += 1
        return tok

    def parse_or() -> Node:
        node = parse_and()
        while peek() == "or":
            eat()
            node = Gate("or", node, parse_and())
        return node

    def parse_and() -> Node:
        node = parse_atom()
        while peek() == "and":
            eat()
            node = Gate("and", node, parse_atom())
        return node

    def parse_atom() -> Node:
        tok = peek()
        if tok == "(":
            eat()
            node = parse_or()
            if peek() != ")":
                raise PolicyError("unbalanced parenthesis")
            eat()
            return node
        if tok is None or tok in (")", "and", "or"):
            raise PolicyError(f"expected attribute, got {tok!r}")
        return Leaf(eat())

    root = parse_or()
    if idx != len(tokens):
        raise PolicyError(f"trailing tokens: {tokens[idx:]}")
    return AccessPolicy(root)


# ----------------------------------------------------------------------
# LSSS compilation and reconstruction
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class LsssMatrix:
    """Share matrix M (beta rows, n columns) with the row -> attribute map."""

    rows: tuple[tuple[int, ...], ...]
    row_attrs: tuple[str, ...]

    def __post_init__(self):
        if not self.rows or len(self.rows) != len(self.row_attrs):
            raise ValueError("matrix shape mismatch")

    @property
    def beta(self) -> int:
        return len(self.rows)

    @property
    def width(self) -> int:
        return len(self.rows[0])

    def rho(self, k: int) -> str:
        """1-based row labelling, matching the scheme's k in [1, beta]."""
        return self.row_attrs[k - 1]


def policy_to_lsss(policy: AccessPolicy, universe: Optional[set[str]] = None) -> LsssMatrix:
    """Standard share-vector propagation.

    The root holds (1); an ``and`` gate hands (v || 1) to its left child
    and (0, ..., 0, -1) to its right child; an ``or`` gate copies its
    vector to both children.  Rows are padded with zeros to the final
    width (1 + number of and-gates).
    """
    if universe is not None:
        missing = policy.attributes() - universe
        if missing:
            raise PolicyError(f"attributes outside the universe: {sorted(missing)}")

    rows: list[list[int]] = []
    attrs: list[str] = []

    def walk(node: Node, vector: list[int], counter: list[int]):
        if isinstance(node, Leaf):
            rows.append(vector)
            attrs.append(node.attr)
            return
        if node.op == "or":
            walk(node.left, list(vector), counter)
            walk(node.right, list(vector), counter)
            return
        counter[0] += 1
        depth = counter[0]
        left = vector + [0] * (depth - len(vector)) + [1]
        right = [0] * depth + [-1]
        walk(node.left, left, counter)
        walk(node.right, right, counter)

    counter = [0]
    walk(policy.root, [1], counter)
    width = counter[0] + 1
    padded = tuple(tuple(row + [0] * (width - len(row))) for row in rows)
    return LsssMatrix(padded, tuple(attrs))


def share_vector(matrix: LsssMatrix, v: list[int], modulus: int) -> list[int]:
    """Row shares lambda_k = <M_k, v> mod p; v[0] is the secret."""
    if len(v) != matrix.width:
        raise ValueError("share vector width mismatch")
    return [sum(m * x for m, x in zip(row, v)) % modulus for row in matrix.rows]


def reconstruction_coefficients(
    matrix: LsssMatrix, attrs: set[str], modulus: int
) -> Optional[dict[int, int]]:
    """Solve sum_j omega_j M_j = (1, 0, ..., 0) over rows labelled in attrs.

    Returns a 1-based {row: omega} map with zero coefficients dropped, or
    None when the attribute set does not satisfy the policy.  Gaussian
    elimination mod p with first-nonzero pivoting keeps the output
    deterministic.
    """
    selected = [k for k in range(matrix.beta) if matrix.row_attrs[k] in attrs]
    if not selected:
        return None
    n = matrix.width
    m = len(selected)
    # Augmented system A * omega = e1 with A = M_selected^T (n x m).
    aug = [[matrix.rows[selected[c]][r] % modulus for c in range(m)] for r in range(n)]
    for r in range(n):
        aug[r].append(1 if r == 0 else 0)

    pivot_of_col: dict[int, int] = {}
    row = 0
    for col in range(m):
        pivot = next((r for r in range(row, n) if aug[r][col]), None)
        if pivot is None:
            continue
        aug[row], aug[pivot] = aug[pivot], aug[row]
        inv = pow(aug[row][col], -1, modulus)
        aug[row] = [x * inv % modulus for x in aug[row]]
        for r in range(n):
            if r != row and aug[r][col]:
                factor = aug[r][col]
                aug[r] = [(a - factor * b) % modulus for a, b in zip(aug[r], aug[row])]
        pivot_of_col[col] = row
        row += 1
        if row == n:
            break

    omega = [0] * m
    for col, prow in pivot_of_col.items():
        omega[col] = aug[prow][m]

    # Verify; an inconsistent system means the set does not satisfy the policy.
    check = [0] * n
    for c, w in enumerate(omega):
        if not w:
            continue
        row_vals = matrix.rows[selected[c]]
        for r in range(n):
            check[r] = (check[r] + w * row_vals[r]) % modulus
    if check[0] != 1 or any(check[1:]):
        return None
    return {selected[c] + 1: omega[c] for c in range(m) if omega[c]}
