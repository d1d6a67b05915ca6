"""Slotted registered ABE with verifiable outsourced decryption.

A slotted scheme has a fixed number L of registration slots.  Users
generate their own key pairs per slot, a transparent curator aggregates
all L public keys into a master public key and per-slot helper keys, and
ciphertexts carry a hash tag binding the KEM secret to the symmetric
blob so an outsourced partial decryption can be checked by its consumer.

The heavy lifting of decryption is pushed to ``transform``, which folds
the LSSS rows into exactly two target-group elements; ``decrypt_user``
then needs a single target-group exponentiation plus hash checks.

Outcome conventions: an unsatisfied policy (transform) or a failed tag
check (decrypt_user) returns ``None`` -- a typed bottom, not an error --
so callers can branch into the dispute path.  A blob that fails
authenticated decryption *after* a passing tag raises
:class:`CorruptionError`, which indicates local state corruption rather
than a misbehaving transformer.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Optional, Sequence

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.ciphers.aead import AESGCM

from .algebra import (
    AccessPolicy,
    CrossIndexSet,
    LsssMatrix,
    PolicyError,
    ProgressionFreeSet,
    build_progression_free_set,
    parse_policy,
    policy_to_lsss,
    reconstruction_coefficients,
    share_vector,
)
from .groups import GroupBackend, SourceElement, TargetElement

_NONCE_BYTES = 12
TAG_BYTES = 32


class SchemeError(ValueError):
    """Structural misuse: bad slot index, wrong list lengths, key mismatch."""


class CorruptionError(Exception):
    """Blob failed authenticated decryption although the tag verified."""


def _digest(domain_tag: str, items: Sequence[bytes]) -> bytes:
    h = hashlib.sha256()
    tag = domain_tag.encode()
    h.update(len(tag).to_bytes(4, "big"))
    h.update(tag)
    for item in items:
        h.update(len(item).to_bytes(4, "big"))
        h.update(item)
    return h.digest()


# ----------------------------------------------------------------------
# Types
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class SetupTrapdoor:
    """Setup randomness, returned only for exponent-oracle tests."""

    a: int
    b: int
    alpha: int
    gammas: tuple[int, ...]
    ts: tuple[int, ...]


@dataclass(frozen=True, eq=False)
class SlotCrs:
    """Per-slot CRS tuple (A_i, B_i, P_i, U_i)."""

    a: SourceElement
    b: SourceElement
    p: SourceElement
    u: SourceElement


@dataclass(eq=False)
class CommonReferenceString:
    backend: GroupBackend
    universe: tuple[str, ...]
    z: TargetElement                      # e(g,g)^alpha
    h: SourceElement
    slots: tuple[SlotCrs, ...]
    w: dict[int, SourceElement]           # cross terms, keyed by d_i + d_j
    pf_set: ProgressionFreeSet
    cross: CrossIndexSet = field(init=False)

    def __post_init__(self):
        self.cross = CrossIndexSet(self.pf_set)

    @property
    def num_slots(self) -> int:
        return len(self.slots)

    def slot(self, i: int) -> SlotCrs:
        if not 1 <= i <= self.num_slots:
            raise SchemeError(f"slot {i} out of range [1, {self.num_slots}]")
        return self.slots[i - 1]


@dataclass(frozen=True, eq=False)
class SlotPublicKey:
    """pk_i = (T_i, Q_i, {V_{j,i}} for j != i).

    Q_i never enters aggregation or decryption; it is kept in the key
    format regardless and checked during registration.
    """

    slot: int
    t: SourceElement
    q: SourceElement
    v: dict[int, SourceElement]


@dataclass(frozen=True, eq=False)
class SlotKeyPair:
    public: SlotPublicKey
    sk: int

    @property
    def slot(self) -> int:
        return self.public.slot


@dataclass(eq=False)
class MasterPublicKey:
    backend: GroupBackend
    universe: tuple[str, ...]
    z: TargetElement
    h: SourceElement
    t_hat: SourceElement
    u_hat: dict[str, SourceElement]
    hash_ids: tuple[str, str, str] = ("H0", "H1", "H2")


@dataclass(eq=False)
class HelperKey:
    slot: int
    attrs: frozenset[str]
    a: SourceElement
    b: SourceElement
    v_hat: SourceElement
    w_hat: dict[str, SourceElement]


@dataclass(eq=False)
class Ciphertext:
    matrix: LsssMatrix
    blob: bytes                            # nonce || AEAD ciphertext
    c1: TargetElement
    c2: SourceElement
    rows: tuple[tuple[SourceElement, SourceElement], ...]   # (C3_k, C4_k)
    c5: SourceElement
    tag: bytes

    @property
    def beta(self) -> int:
        return self.matrix.beta


@dataclass(frozen=True, eq=False)
class TransformCiphertext:
    c1: TargetElement
    c2: TargetElement


# ----------------------------------------------------------------------
# KEM / symmetric layer
# ----------------------------------------------------------------------


def kem_key(backend: GroupBackend, mu: TargetElement) -> bytes:
    return _digest("H1", [mu.to_bytes()])


def kem_derive(backend: GroupBackend, mu: TargetElement, c_blob: bytes) -> tuple[bytes, bytes, bytes]:
    """Derive (t1, key, tag) from the KEM secret and the sealed blob."""
    t1 = backend.scalar_to_bytes(backend.hash_to_scalar("H0", [mu.to_bytes()]))
    key = kem_key(backend, mu)
    tag = _digest("H2", [t1, c_blob])
    return t1, key, tag


def seal_blob(key: bytes, message: bytes, rng) -> bytes:
    nonce = rng.randbytes(_NONCE_BYTES)
    return nonce + AESGCM(key).encrypt(nonce, message, b"")


def open_blob(key: bytes, blob: bytes) -> bytes:
    if len(blob) < _NONCE_BYTES:
        raise CorruptionError("sealed blob shorter than a nonce")
    try:
        return AESGCM(key).decrypt(blob[:_NONCE_BYTES], blob[_NONCE_BYTES:], b"")
    except InvalidTag as exc:
        raise CorruptionError("authenticated decryption failed after a passing tag") from exc


# ----------------------------------------------------------------------
# Scheme algorithms
# ----------------------------------------------------------------------


def setup_with_trapdoor(
    backend: GroupBackend, num_slots: int, universe: Sequence[str], rng
) -> tuple[CommonReferenceString, SetupTrapdoor]:
    """Slotted setup, also returning the sampled exponents.

    The trapdoor exists so mock-backend tests can recompute every CRS
    component from the direct formulas; production callers use
    :func:`setup` and never see it.
    """
    if num_slots < 1:
        raise SchemeError("need at least one slot")
    universe = tuple(universe)
    if not universe or len(set(universe)) != len(universe):
        raise SchemeError("universe must be nonempty and duplicate-free")

    order = backend.order
    pf_set = build_progression_free_set(num_slots)
    cross = CrossIndexSet(pf_set)
    d_max = pf_set.d_max

    a = backend.random_scalar(rng, nonzero=True)
    b = backend.random_scalar(rng, nonzero=True)
    gammas = tuple(backend.random_scalar(rng, nonzero=True) for _ in range(num_slots))
    ts = tuple(pow(a, d, order) for d in pf_set.d)
    alpha = -pow(a, 3 * d_max, order) % order

    g = backend.g
    h_exp = sum(pow(a, 3 * d_max - d, order) for d in pf_set.d) % order
    h = g ** h_exp
    g_alpha = g ** alpha

    slots = tuple(
        SlotCrs(
            a=g ** ts[i],
            b=g_alpha * h ** ts[i],
            p=g ** gammas[i],
            u=g ** (b * ts[i] % order),
        )
        for i in range(num_slots)
    )
    w = {zv: g ** (b * pow(a, zv, order) % order) for zv in cross.values}
    crs = CommonReferenceString(
        backend=backend,
        universe=universe,
        z=backend.gt ** alpha,
        h=h,
        slots=slots,
        w=w,
        pf_set=pf_set,
    )
    return crs, SetupTrapdoor(a, b, alpha, gammas, ts)


def setup(backend: GroupBackend, num_slots: int, universe: Sequence[str], rng) -> CommonReferenceString:
    return setup_with_trapdoor(backend, num_slots, universe, rng)[0]


def keygen(crs: CommonReferenceString, slot: int, rng, secret: Optional[int] = None) -> SlotKeyPair:
    """Per-slot key pair; ``secret`` overrides the sampled r_i in tests."""
    if not 1 <= slot <= crs.num_slots:
        raise SchemeError(f"slot {slot} out of range [1, {crs.num_slots}]")
    backend = crs.backend
    r = backend.random_scalar(rng, nonzero=True) if secret is None else secret % backend.order
    g = backend.g
    public = SlotPublicKey(
        slot=slot,
        t=g ** r,
        q=crs.slot(slot).p ** r,
        v={j: crs.slot(j).a ** r for j in range(1, crs.num_slots + 1) if j != slot},
    )
    return SlotKeyPair(public=public, sk=r)


def check_public_key(crs: CommonReferenceString, pk: SlotPublicKey) -> bool:
    """Pairing consistency guard for registered keys.

    Confirms T_i, Q_i and every V_{j,i} share the same exponent relative
    to their CRS bases: e(T_i, A_j) = e(g, V_{j,i}) and
    e(T_i, P_i) = e(g, Q_i).
    """
    backend = crs.backend
    g = backend.g
    if set(pk.v) != {j for j in range(1, crs.num_slots + 1) if j != pk.slot}:
        return False
    if backend.pairing(pk.t, crs.slot(pk.slot).p) != backend.pairing(g, pk.q):
        return False
    for j, v in pk.v.items():
        if backend.pairing(pk.t, crs.slot(j).a) != backend.pairing(g, v):
            return False
    return True


def register(
    crs: CommonReferenceString,
    pairs: Sequence[tuple[SlotPublicKey, Sequence[str]]],
    check_keys: bool = True,
) -> tuple[MasterPublicKey, list[HelperKey]]:
    """Aggregate L (public key, attribute set) pairs.

    Empty aggregation products (single-user systems, universally held
    attributes) are the group identity.
    """
    backend = crs.backend
    L = crs.num_slots
    if len(pairs) != L:
        raise SchemeError(f"expected {L} key-attribute pairs, got {len(pairs)}")
    universe = crs.universe
    attr_sets: list[frozenset[str]] = []
    for i, (pk, attrs) in enumerate(pairs, start=1):
        if pk.slot != i:
            raise SchemeError(f"pair {i} carries slot {pk.slot}")
        attrs = frozenset(attrs)
        if not attrs <= set(universe):
            raise SchemeError(f"attributes {sorted(attrs - set(universe))} outside the universe")
        if check_keys and not check_public_key(crs, pk):
            raise SchemeError(f"public key for slot {i} fails the pairing consistency check")
        attr_sets.append(attrs)

    pks = [pk for pk, _ in pairs]
    t_hat = backend.source_product(pk.t for pk in pks)
    u_hat = {
        w: backend.source_product(
            crs.slot(j).u for j in range(1, L + 1) if w not in attr_sets[j - 1]
        )
        for w in universe
    }
    helpers = []
    for i in range(1, L + 1):
        v_hat = backend.source_product(pks[j - 1].v[i] for j in range(1, L + 1) if j != i)
        w_hat = {
            w: backend.source_product(
                crs.w[crs.cross.f(i, j)]
                for j in range(1, L + 1)
                if j != i and w not in attr_sets[j - 1]
            )
            for w in universe
        }
        helpers.append(
            HelperKey(slot=i, attrs=attr_sets[i - 1], a=crs.slot(i).a, b=crs.slot(i).b, v_hat=v_hat, w_hat=w_hat)
        )
    mpk = MasterPublicKey(
        backend=backend,
        universe=universe,
        z=crs.z,
        h=crs.h,
        t_hat=t_hat,
        u_hat=u_hat,
    )
    return mpk, helpers


def encrypt(mpk: MasterPublicKey, policy: AccessPolicy | str, message: bytes, rng) -> Ciphertext:
    if isinstance(policy, str):
        policy = parse_policy(policy)
    matrix = policy_to_lsss(policy, universe=set(mpk.universe))
    backend = mpk.backend
    order = backend.order
    g = backend.g

    mu = backend.random_target(rng)
    blob = seal_blob(kem_key(backend, mu), message, rng)
    _, _, tag = kem_derive(backend, mu, blob)

    s = backend.random_scalar(rng, nonzero=True)
    v = [s] + [backend.random_scalar(rng) for _ in range(matrix.width - 1)]
    shares = share_vector(matrix, v, order)
    # split h = h1 * h2 freshly per encryption
    h1 = backend.random_source(rng)
    h2 = mpk.h / h1

    rows = []
    for k in range(1, matrix.beta + 1):
        s_k = backend.random_scalar(rng, nonzero=True)
        c3 = h2 ** shares[k - 1] * mpk.u_hat[matrix.rho(k)].inverse() ** s_k
        c4 = g ** s_k
        rows.append((c3, c4))

    return Ciphertext(
        matrix=matrix,
        blob=blob,
        c1=mu * mpk.z ** s,
        c2=g ** s,
        rows=tuple(rows),
        c5=(h1 / mpk.t_hat) ** s,
        tag=tag,
    )


def transform(hsk: HelperKey, ct: Ciphertext) -> Optional[TransformCiphertext]:
    """Fold the ciphertext into two target-group elements, or None.

    None signals an unsatisfied policy, not a failure.
    """
    backend = ct.c2.backend
    omega = reconstruction_coefficients(ct.matrix, set(hsk.attrs), backend.order)
    if omega is None:
        return None
    pair = backend.pairing
    acc = ct.c1 / pair(ct.c2, hsk.b)
    acc = acc * pair(ct.c5, hsk.a)
    acc = acc * pair(ct.c2, hsk.v_hat)
    for k, coeff in omega.items():
        c3, c4 = ct.rows[k - 1]
        term = pair(c3, hsk.a) * pair(c4, hsk.w_hat[ct.matrix.rho(k)])
        acc = acc * term ** coeff
    return TransformCiphertext(c1=acc, c2=pair(ct.c2, hsk.a))


def decrypt_user(sk: int, ct_prime: TransformCiphertext, ct: Ciphertext) -> Optional[bytes]:
    """Final decryption: one target-group exponentiation plus hash checks.

    Returns None when the transform ciphertext fails the tag check.
    """
    backend = ct_prime.c1.backend
    mu_prime = ct_prime.c1 * ct_prime.c2 ** sk
    _, key, tag = kem_derive(backend, mu_prime, ct.blob)
    if tag != ct.tag:
        return None
    return open_blob(key, ct.blob)
