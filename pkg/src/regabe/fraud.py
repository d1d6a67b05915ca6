"""Discrete-log-equality proofs and transform fraud proofs.

The dispute mechanism rests on a sigma protocol for the relation
"image1 = base1^s and image2 = base2^s", made non-interactive via
Fiat-Shamir.  The two (base, image) pairs may live in different groups
of the same prime order; for fraud proofs one side is the target group
(the transform ciphertext) and the other the source group (the user's
registered key).

A fraud proof consists of a verification key vk = C2'^sk together with a
DLEQ proof that vk uses the same exponent as the user's public T = g^sk.
A verifier recomputes mu'' = C1' * vk and checks it against the
ciphertext tag: an honest transform makes the tag match (no fraud),
while any tampering surfaces as a mismatch.  The user's secret never
leaves the sigma protocol's masked response.

The Fiat-Shamir hash binds the full statement (both bases and both
images), not just the images and commitments, so a proof cannot be
replayed against a different statement.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from .groups import GroupError, SourceElement, TargetElement
from .slotted import Ciphertext, TransformCiphertext, kem_derive

Element = Union[SourceElement, TargetElement]


@dataclass(frozen=True, eq=False)
class DleqStatement:
    """Claim: image1 = base1^s and image2 = base2^s for a common s."""

    base1: Element
    image1: Element
    base2: Element
    image2: Element

    def challenge_inputs(self, commit1: Element, commit2: Element) -> list[bytes]:
        return [
            self.base1.to_bytes(),
            self.image1.to_bytes(),
            self.base2.to_bytes(),
            self.image2.to_bytes(),
            commit1.to_bytes(),
            commit2.to_bytes(),
        ]


@dataclass(frozen=True, eq=False)
class DleqProof:
    commit1: Element
    commit2: Element
    challenge: int
    response: int


@dataclass(frozen=True, eq=False)
class FraudProof:
    vk: TargetElement
    proof: DleqProof


def dleq_prove(statement: DleqStatement, witness: int, rng) -> DleqProof:
    backend = statement.base1.backend
    r = backend.random_scalar(rng)
    commit1 = statement.base1 ** r
    commit2 = statement.base2 ** r
    c = backend.hash_to_scalar("FS-DLEQ", statement.challenge_inputs(commit1, commit2))
    z = (r + c * witness) % backend.order
    return DleqProof(commit1, commit2, c, z)


def dleq_verify(statement: DleqStatement, proof: DleqProof) -> bool:
    """Recompute the challenge and check both exponent equations.

    Malformed inputs reject rather than raise.
    """
    backend = statement.base1.backend
    try:
        if not (0 <= proof.challenge < backend.order and 0 <= proof.response < backend.order):
            return False
        c = backend.hash_to_scalar(
            "FS-DLEQ", statement.challenge_inputs(proof.commit1, proof.commit2)
        )
        if c != proof.challenge:
            return False
        if statement.base1 ** proof.response != proof.commit1 * statement.image1 ** c:
            return False
        if statement.base2 ** proof.response != proof.commit2 * statement.image2 ** c:
            return False
        return True
    except (GroupError, AttributeError, TypeError):
        return False


def fraud_statement(ct_prime: TransformCiphertext, vk: TargetElement, pk_t: SourceElement) -> DleqStatement:
    """The cross-group statement (C2', vk, g, T) tying vk to the user key."""
    g = pk_t.backend.g
    return DleqStatement(base1=ct_prime.c2, image1=vk, base2=g, image2=pk_t)


def fraud_prove(sk: int, ct_prime: TransformCiphertext, pk_t: SourceElement, rng) -> FraudProof:
    """Accusation material for a transform the user could not decrypt.

    Requires sk to be the slot secret behind pk_t = g^sk; the resulting
    proof is publicly checkable against the stored transform and tag.
    """
    vk = ct_prime.c2 ** sk
    return FraudProof(vk=vk, proof=dleq_prove(fraud_statement(ct_prime, vk, pk_t), sk, rng))


def fraud_verify(
    proof: FraudProof,
    ct_prime: TransformCiphertext,
    ct: Ciphertext,
    pk_t: SourceElement,
) -> int:
    """1 = fraud confirmed (transform provably wrong), 0 = no fraud shown.

    Rejecting the DLEQ gate returns 0: an invalid accusation never
    convicts, which is what shields an honest transformer.
    """
    try:
        if not dleq_verify(fraud_statement(ct_prime, proof.vk, pk_t), proof.proof):
            return 0
        backend = ct_prime.c1.backend
        mu2 = ct_prime.c1 * proof.vk
        _, _, tag = kem_derive(backend, mu2, ct.blob)
        return 1 if tag != ct.tag else 0
    except (GroupError, AttributeError, TypeError):
        return 0
