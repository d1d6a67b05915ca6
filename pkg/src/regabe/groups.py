"""Symmetric-pairing group abstraction with two interchangeable backends.

The scheme layer is written against a symmetric bilinear group
(G, G_T, g, e).  Two backends realize it:

* ``bls12-381`` -- the production curve.  BLS12-381 pairings are
  asymmetric, so a source element carries a (G1, G2) component pair with
  the same discrete log, maintained in lockstep under every operation;
  ``pairing(x, y)`` feeds x's G1 half and y's G2 half to the ate pairing.
  The symmetric equations then hold verbatim.

* ``mock-<p>`` -- exponent arithmetic modulo a small prime (default
  7919).  An element *is* its discrete log, pairings multiply exponents,
  and every algebraic identity can be checked exactly.  Useful only for
  oracle tests; it offers no hiding whatsoever.

All elements are immutable; operations are pure apart from the per-backend
operation counters, which exist for cost assertions in tests and benches.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Iterable

from . import bls12381 as curve

KIND_SOURCE = 1
KIND_TARGET = 2

_COUNTER_KEYS = ("pairing", "source_mul", "source_exp", "target_mul", "target_exp")


class GroupError(ValueError):
    """Malformed element, backend mismatch, or invalid group operation."""


def frame(kind: int, payload: bytes) -> bytes:
    """Canonical element frame: 1-byte kind tag, 4-byte BE length, payload."""
    return bytes([kind]) + len(payload).to_bytes(4, "big") + payload


def parse_frame(data: bytes) -> tuple[int, bytes]:
    if len(data) < 5:
        raise GroupError("element frame too short")
    kind = data[0]
    length = int.from_bytes(data[1:5], "big")
    payload = data[5:]
    if len(payload) != length:
        raise GroupError("element frame length mismatch")
    return kind, payload


class _Element:
    __slots__ = ("backend", "value")
    kind = 0

    def __init__(self, backend: "GroupBackend", value):
        self.backend = backend
        self.value = value

    def _check_peer(self, other):
        if type(other) is not type(self):
            raise GroupError(f"cannot combine {type(self).__name__} with {type(other).__name__}")
        if other.backend.name != self.backend.name:
            raise GroupError("cannot combine elements from different backends")

    def __mul__(self, other):
        self._check_peer(other)
        return self.backend._mul(self.kind, self.value, other.value)

    def __truediv__(self, other):
        self._check_peer(other)
        return self.backend._mul(self.kind, self.value, self.backend._inv(self.kind, other.value).value)

    def __pow__(self, k: int):
        return self.backend._exp(self.kind, self.value, k)

    def inverse(self):
        return self.backend._inv(self.kind, self.value)

    def is_identity(self) -> bool:
        return self.value == self.backend._identity_value(self.kind)

    def to_bytes(self) -> bytes:
        return frame(self.kind, self.backend._encode(self.kind, self.value))

    def __eq__(self, other):
        return (
            type(other) is type(self)
            and other.backend.name == self.backend.name
            and other.value == self.value
        )

    def __ne__(self, other):
        return not self.__eq__(other)

    def __hash__(self):
        return hash((self.kind, self.backend.name, self.value))

    def __repr__(self):
        return f"{type(self).__name__}({self.backend.name}, {self.to_bytes()[5:13].hex()}...)"


class SourceElement(_Element):
    kind = KIND_SOURCE


class TargetElement(_Element):
    kind = KIND_TARGET


@dataclass(frozen=True)
class GroupParams:
    """Public parameters of the bilinear group: (p, g, e(g,g))."""

    order: int
    g: SourceElement
    gt: TargetElement
    backend_name: str


class GroupBackend:
    """Shared element plumbing; subclasses provide the raw arithmetic."""

    name: str
    order: int

    def __init__(self):
        self.counters = dict.fromkeys(_COUNTER_KEYS, 0)

    # -- public surface -------------------------------------------------

    @property
    def scalar_bytes(self) -> int:
        return (self.order.bit_length() + 7) // 8

    @property
    def g(self) -> SourceElement:
        return SourceElement(self, self._source_generator_value())

    @property
    def gt(self) -> TargetElement:
        return TargetElement(self, self._target_generator_value())

    @property
    def params(self) -> GroupParams:
        return GroupParams(self.order, self.g, self.gt, self.name)

    def source_identity(self) -> SourceElement:
        return SourceElement(self, self._identity_value(KIND_SOURCE))

    def target_identity(self) -> TargetElement:
        return TargetElement(self, self._identity_value(KIND_TARGET))

    def pairing(self, x: SourceElement, y: SourceElement) -> TargetElement:
        if not isinstance(x, SourceElement) or not isinstance(y, SourceElement):
            raise GroupError("pairing expects two source-group elements")
        if x.backend.name != self.name or y.backend.name != self.name:
            raise GroupError("pairing across backends")
        self.counters["pairing"] += 1
        return TargetElement(self, self._pair(x.value, y.value))

    def source_product(self, elements: Iterable[SourceElement]) -> SourceElement:
        acc = self.source_identity()
        for el in elements:
            acc = acc * el
        return acc

    def random_scalar(self, rng, nonzero: bool = False) -> int:
        low = 1 if nonzero else 0
        return rng.randrange(low, self.order)

    def random_source(self, rng) -> SourceElement:
        return self.g ** self.random_scalar(rng, nonzero=True)

    def random_target(self, rng) -> TargetElement:
        return self.gt ** self.random_scalar(rng, nonzero=True)

    def hash_to_scalar(self, domain_tag: str | bytes, inputs: Iterable[bytes] = ()) -> int:
        tag = domain_tag.encode() if isinstance(domain_tag, str) else bytes(domain_tag)
        h = hashlib.sha256()
        h.update(len(tag).to_bytes(4, "big"))
        h.update(tag)
        for item in inputs:
            h.update(len(item).to_bytes(4, "big"))
            h.update(item)
        return int.from_bytes(h.digest(), "big") % self.order

    def scalar_to_bytes(self, k: int) -> bytes:
        if not 0 <= k < self.order:
            raise GroupError("scalar out of range")
        return k.to_bytes(self.scalar_bytes, "big")

    def scalar_from_bytes(self, data: bytes) -> int:
        if len(data) != self.scalar_bytes:
            raise GroupError("bad scalar width")
        k = int.from_bytes(data, "big")
        if k >= self.order:
            raise GroupError("scalar out of range")
        return k

    def element_from_bytes(self, data: bytes) -> SourceElement | TargetElement:
        kind, payload = parse_frame(data)
        if kind == KIND_SOURCE:
            return SourceElement(self, self._decode(KIND_SOURCE, payload))
        if kind == KIND_TARGET:
            return TargetElement(self, self._decode(KIND_TARGET, payload))
        raise GroupError(f"unknown element kind {kind}")

    def reset_counters(self) -> None:
        for key in self.counters:
            self.counters[key] = 0

    def snapshot_counters(self) -> dict:
        return dict(self.counters)

    # -- dispatch helpers -------------------------------------------------

    def _mul(self, kind, v1, v2):
        if kind == KIND_SOURCE:
            self.counters["source_mul"] += 1
            return SourceElement(self, self._source_mul(v1, v2))
        self.counters["target_mul"] += 1
        return TargetElement(self, self._target_mul(v1, v2))

    def _exp(self, kind, v, k):
        k = int(k) % self.order
        if kind == KIND_SOURCE:
            self.counters["source_exp"] += 1
            return SourceElement(self, self._source_exp(v, k))
        self.counters["target_exp"] += 1
        return TargetElement(self, self._target_exp(v, k))

    def _inv(self, kind, v):
        if kind == KIND_SOURCE:
            return SourceElement(self, self._source_inv(v))
        return TargetElement(self, self._target_inv(v))

    def _identity_value(self, kind):
        raise NotImplementedError

    def _encode(self, kind, v) -> bytes:
        raise NotImplementedError

    def _decode(self, kind, payload: bytes):
        raise NotImplementedError


class MockBackend(GroupBackend):
    """Exponent arithmetic mod a small prime; elements are discrete logs."""

    def __init__(self, order: int = 7919):
        if order < 3 or any(order % q == 0 for q in range(2, min(order, 1000))):
            raise GroupError("mock order must be a prime >= 3")
        self.order = order
        self.name = f"mock-{order}"
        super().__init__()

    def _source_generator_value(self):
        return 1

    def _target_generator_value(self):
        return 1

    def _identity_value(self, kind):
        return 0

    def _pair(self, x, y):
        return x * y % self.order

    def _source_mul(self, a, b):
        return (a + b) % self.order

    def _source_exp(self, a, k):
        return a * k % self.order

    def _source_inv(self, a):
        return -a % self.order

    _target_mul = _source_mul
    _target_exp = _source_exp
    _target_inv = _source_inv

    def _encode(self, kind, v) -> bytes:
        return v.to_bytes(8, "big")

    def _decode(self, kind, payload: bytes):
        if len(payload) != 8:
            raise GroupError("bad mock element width")
        v = int.from_bytes(payload, "big")
        if v >= self.order:
            raise GroupError("mock element out of range")
        return v


class Bls12381Backend(GroupBackend):
    """BLS12-381 with lockstep (G1, G2) source elements.

    Decoding checks curve and subgroup membership per component.  The
    lockstep relation between the two halves of a source element is not
    verified on decode (it is a DDH statement); key registration performs
    pairing consistency checks on untrusted keys instead.
    """

    name = "bls12-381"
    order = curve.R

    def _source_generator_value(self):
        return (curve.G1_GEN, curve.G2_GEN)

    def _target_generator_value(self):
        if not hasattr(Bls12381Backend, "_gt_cache"):
            Bls12381Backend._gt_cache = curve.pairing(curve.G1_GEN, curve.G2_GEN)
        return Bls12381Backend._gt_cache

    def _identity_value(self, kind):
        if kind == KIND_SOURCE:
            return (None, None)
        return curve.F12_ONE

    def _pair(self, x, y):
        return curve.pairing(x[0], y[1])

    def _source_mul(self, a, b):
        return (curve.g1_add(a[0], b[0]), curve.g2_add(a[1], b[1]))

    def _source_exp(self, a, k):
        return (curve.g1_mul(a[0], k), curve.g2_mul(a[1], k))

    def _source_inv(self, a):
        return (curve.g1_neg(a[0]), curve.g2_neg(a[1]))

    def _target_mul(self, a, b):
        return curve.f12_mul(a, b)

    def _target_exp(self, a, k):
        return curve.f12_pow(a, k)

    def _target_inv(self, a):
        return curve.f12_inv(a)

    def _encode(self, kind, v) -> bytes:
        if kind == KIND_SOURCE:
            return curve.g1_to_bytes(v[0]) + curve.g2_to_bytes(v[1])
        return curve.f12_to_bytes(v)

    def _decode(self, kind, payload: bytes):
        try:
            if kind == KIND_SOURCE:
                if len(payload) != curve.G1_BYTES + curve.G2_BYTES:
                    raise ValueError("bad source element width")
                return (
                    curve.g1_from_bytes(payload[: curve.G1_BYTES]),
                    curve.g2_from_bytes(payload[curve.G1_BYTES:]),
                )
            return curve.f12_from_bytes(payload)
        except ValueError as exc:
            raise GroupError(str(exc)) from None


_BACKENDS = {
    "mock": MockBackend,
    "bls12-381": Bls12381Backend,
    "real": Bls12381Backend,
}


def get_backend(name: str) -> GroupBackend:
    """Instantiate a backend by name ("mock", "mock-<prime>", "bls12-381")."""
    if name.startswith("mock-"):
        return MockBackend(int(name.split("-", 1)[1]))
    try:
        return _BACKENDS[name]()
    except KeyError:
        raise GroupError(f"unknown backend {name!r}") from None
