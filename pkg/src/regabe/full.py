"""Dynamic registration on top of the slotted scheme.

A system sized for 2^l users runs l+1 slotted instances with 1, 2, ...,
2^l slots.  The registration counter ctr walks every instance through
its slots; whenever an instance's last slot fills, that instance is
re-aggregated over its current window of users and fresh helper keys are
written into the bookkeeping dictionaries:

* ``dict1[k][slot]`` -- the public key and attribute set currently
  occupying a slot of instance k;
* ``dict2[(user, k)]`` -- the helper key user got from the one window of
  instance k that contains them.  Windows of an instance partition the
  user sequence into consecutive blocks of 2^k, so each (user, k) cell
  is written exactly once and never goes stale *relative to its own
  window*.

A ciphertext stamped with registration count n carries one component per
aggregated instance.  Instance k's component matches user u's helper key
iff their windows coincide: ceil(u / 2^k) == floor(n / 2^k).  Picking
only window-matched instances matters: a largest-aggregated-instance
rule alone can pick a helper key from a *newer* window than the
ciphertext (e.g. user 3 against a 3-user ciphertext after a 4th user
registered) and produce a well-formed but undecryptable transform.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from . import slotted
from .algebra import AccessPolicy
from .groups import GroupBackend
from .slotted import (
    Ciphertext,
    CommonReferenceString,
    HelperKey,
    MasterPublicKey,
    SchemeError,
    SlotKeyPair,
    SlotPublicKey,
    TransformCiphertext,
)


@dataclass(eq=False)
class MultiCrs:
    backend: GroupBackend
    universe: tuple[str, ...]
    instances: tuple[CommonReferenceString, ...]

    @property
    def levels(self) -> int:
        return len(self.instances) - 1

    @property
    def capacity(self) -> int:
        return 1 << self.levels


@dataclass(frozen=True)
class UserPublicKey:
    ctr: int
    publics: tuple[SlotPublicKey, ...]


@dataclass(frozen=True)
class UserKeys:
    ctr: int
    pairs: tuple[SlotKeyPair, ...]

    @property
    def public(self) -> UserPublicKey:
        return UserPublicKey(self.ctr, tuple(p.public for p in self.pairs))

    def sk(self, instance: int) -> int:
        return self.pairs[instance].sk


@dataclass(frozen=True, eq=False)
class MultiMasterKey:
    ctr: int
    components: tuple[Optional[MasterPublicKey], ...]


@dataclass(eq=False)
class AuxState:
    """Curator bookkeeping; treated as an immutable snapshot by readers."""

    ctr: int
    dict1: dict[int, dict[int, tuple[SlotPublicKey, frozenset[str]]]]
    dict2: dict[tuple[int, int], HelperKey]
    mpk: tuple[Optional[MasterPublicKey], ...]

    @property
    def master(self) -> MultiMasterKey:
        return MultiMasterKey(self.ctr, self.mpk)


@dataclass(eq=False)
class MultiCiphertext:
    ctr: int
    components: tuple[Optional[Ciphertext], ...]


@dataclass(frozen=True)
class HelperBundle:
    """Per-instance helper keys for one user, stamped with the aux state."""

    user: int                      # 1-based registration position
    state_ctr: int
    helpers: dict[int, HelperKey]


@dataclass(frozen=True, eq=False)
class TransformOutcome:
    status: str                    # "ok" | "unsatisfied" | "needs-update"
    instance: Optional[int] = None
    ct_prime: Optional[TransformCiphertext] = None

    @property
    def ok(self) -> bool:
        return self.status == "ok"


def setup(backend: GroupBackend, levels: int, universe: Sequence[str], rng) -> MultiCrs:
    """l+1 slotted setups with 1, 2, ..., 2^l slots."""
    if levels < 0:
        raise SchemeError("levels must be >= 0")
    universe = tuple(universe)
    instances = tuple(
        slotted.setup(backend, 1 << k, universe, rng) for k in range(levels + 1)
    )
    return MultiCrs(backend=backend, universe=universe, instances=instances)


def new_aux(crs: MultiCrs) -> AuxState:
    return AuxState(
        ctr=0,
        dict1={k: {} for k in range(crs.levels + 1)},
        dict2={},
        mpk=tuple(None for _ in range(crs.levels + 1)),
    )


def slot_indices(ctr: int, levels: int) -> tuple[int, ...]:
    """Slot of each instance at registration count ctr: (ctr mod 2^k) + 1."""
    return tuple((ctr % (1 << k)) + 1 for k in range(levels + 1))


def keygen(crs: MultiCrs, aux: AuxState, rng) -> UserKeys:
    if aux.ctr >= crs.capacity:
        raise SchemeError(f"registration capacity {crs.capacity} exhausted")
    slots = slot_indices(aux.ctr, crs.levels)
    pairs = tuple(
        slotted.keygen(crs.instances[k], slots[k], rng) for k in range(crs.levels + 1)
    )
    return UserKeys(ctr=aux.ctr, pairs=pairs)


def register(
    crs: MultiCrs,
    aux: AuxState,
    pk: UserPublicKey,
    attrs: Sequence[str],
    check_keys: bool = True,
) -> tuple[MultiMasterKey, AuxState]:
    """Register one user; re-aggregates every instance whose window fills.

    Returns the new master key and a new aux snapshot; the input aux is
    left untouched.
    """
    if pk.ctr != aux.ctr:
        raise SchemeError(f"stale public key: stamped {pk.ctr}, state at {aux.ctr}")
    if aux.ctr >= crs.capacity:
        raise SchemeError(f"registration capacity {crs.capacity} exhausted")
    attrs = frozenset(attrs)
    if not attrs <= set(crs.universe):
        raise SchemeError(f"attributes {sorted(attrs - set(crs.universe))} outside the universe")

    levels = crs.levels
    slots = slot_indices(aux.ctr, levels)
    dict1 = {k: dict(aux.dict1[k]) for k in range(levels + 1)}
    dict2 = dict(aux.dict2)
    mpk = list(aux.mpk)

    for k in range(levels + 1):
        size = 1 << k
        i_k = slots[k]
        if pk.publics[k].slot != i_k:
            raise SchemeError(f"instance {k}: key is for slot {pk.publics[k].slot}, expected {i_k}")
        dict1[k][i_k] = (pk.publics[k], attrs)
        if i_k == size:
            window = [dict1[k][i] for i in range(1, size + 1)]
            mpk_k, helpers = slotted.register(crs.instances[k], window, check_keys=check_keys)
            mpk[k] = mpk_k
            for i in range(1, size + 1):
                dict2[(aux.ctr + i + 1 - size, k)] = helpers[i - 1]

    new_state = AuxState(ctr=aux.ctr + 1, dict1=dict1, dict2=dict2, mpk=tuple(mpk))
    return new_state.master, new_state


def encrypt(
    master: MultiMasterKey, policy: AccessPolicy | str, message: bytes, rng
) -> MultiCiphertext:
    """Encrypt under every aggregated instance; bottom elsewhere."""
    if all(c is None for c in master.components):
        raise SchemeError("no registered users: every master key component is bottom")
    components = tuple(
        None if mpk_k is None else slotted.encrypt(mpk_k, policy, message, rng)
        for mpk_k in master.components
    )
    return MultiCiphertext(ctr=master.ctr, components=components)


def update(crs: MultiCrs, aux: AuxState, pk: UserPublicKey) -> Optional[HelperBundle]:
    """Helper keys for a registered user, or None for an unknown key."""
    if pk.ctr >= aux.ctr:
        return None
    user = pk.ctr + 1
    helpers = {
        k: aux.dict2[(user, k)]
        for k in range(crs.levels + 1)
        if (user, k) in aux.dict2
    }
    return HelperBundle(user=user, state_ctr=aux.ctr, helpers=helpers)


def window_matches(user: int, instance: int, ct_ctr: int) -> bool:
    """True when instance k's aggregation window for this user is the one
    the ciphertext component was encrypted under."""
    size = 1 << instance
    return (user + size - 1) // size == ct_ctr // size


def transform_full(bundle: HelperBundle, ct: MultiCiphertext) -> TransformOutcome:
    """Pick the freshest usable instance and run the slotted transform.

    An instance is usable when the user holds its helper key, the
    ciphertext has a component for it, and the helper key's aggregation
    window matches the ciphertext stamp.  Among usable instances the
    largest index (freshest aggregation) is tried first.
    """
    for k in sorted(bundle.helpers, reverse=True):
        component = ct.components[k] if k < len(ct.components) else None
        if component is None:
            continue
        if not window_matches(bundle.user, k, ct.ctr):
            continue
        ct_prime = slotted.transform(bundle.helpers[k], component)
        if ct_prime is not None:
            return TransformOutcome(status="ok", instance=k, ct_prime=ct_prime)
    if bundle.state_ctr < ct.ctr:
        return TransformOutcome(status="needs-update")
    return TransformOutcome(status="unsatisfied")


def decrypt_with(
    keys: UserKeys, instance: int, ct_prime: TransformCiphertext, ct: MultiCiphertext
) -> Optional[bytes]:
    component = ct.components[instance]
    if component is None:
        raise SchemeError(f"ciphertext has no component for instance {instance}")
    return slotted.decrypt_user(keys.sk(instance), ct_prime, component)
