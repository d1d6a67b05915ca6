"""Registered attribute-based encryption with verifiable outsourced
decryption, fraud-proof arbitration, and a deterministic ledger-backed
data-sharing simulator."""

from .algebra import (
    AccessPolicy,
    LsssMatrix,
    ProgressionFreeSet,
    build_progression_free_set,
    parse_policy,
    policy_to_lsss,
    reconstruction_coefficients,
    verify_set,
)
from .fraud import DleqProof, DleqStatement, FraudProof, dleq_prove, dleq_verify, fraud_prove, fraud_verify
from .groups import GroupBackend, GroupError, SourceElement, TargetElement, get_backend
from .ledger import Ledger, LedgerError, TaskRecord
from .slotted import (
    Ciphertext,
    CommonReferenceString,
    CorruptionError,
    HelperKey,
    MasterPublicKey,
    SchemeError,
    SlotKeyPair,
    TransformCiphertext,
)

__version__ = "0.1.0"
