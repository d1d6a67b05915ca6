"""Deterministic multi-party simulation of the data-sharing protocol.

One scenario wires together every role around the simulated ledger and
an in-memory content-addressed store standing in for the file network:

* the curator registers users, snapshots its state into the store and
  publishes (ctr, pk digest, state digest) on-chain;
* the owner encrypts, stores the ciphertext and publishes its tag;
* the consumer escrows a reward task, checks the submitted transform
  locally, and either lets the window lapse or raises a dispute;
* the decryption server answers tasks honestly or per a corruption
  strategy; the verifier arbitrates disputes with the public fraud-proof
  check.

All randomness flows from the scenario seed; wall-clock time is only
observed for the report's phase timings and never influences behavior.

The published per-ciphertext tag is a hash over the component tags of
the multi-instance ciphertext (components for unaggregated instances
contribute nothing).  The verifier recomputes it from the stored bytes,
then checks the disputed component's own tag, so the single on-chain
tag still binds the owner to every component.
"""

from __future__ import annotations

import hashlib
import math
import time
from dataclasses import dataclass, field
from typing import Optional

from . import fraud, full, serial, slotted
from .groups import get_backend
from .ledger import Event, Ledger, OPEN, RESOLVED_PAID
from .serial import SerialError, content_digest

STRATEGIES = ("honest", "corrupt-C1", "corrupt-C2", "garbage")

KC, DO, DU, DCS, PV = "kc", "do", "du", "dcs", "pv"


class ScenarioFailure(AssertionError):
    """A scenario-level invariant failed; carries the offending step."""

    def __init__(self, step: str, detail: str):
        super().__init__(f"[{step}] {detail}")
        self.step = step


def _check(step: str, condition: bool, detail: str) -> None:
    if not condition:
        raise ScenarioFailure(step, detail)


class ContentStore:
    """Content-addressed blob store: digest -> immutable bytes."""

    def __init__(self):
        self._entries: dict[str, bytes] = {}

    def put(self, data: bytes) -> str:
        digest = content_digest(data)
        self._entries.setdefault(digest, bytes(data))
        return digest

    def get(self, digest: str) -> bytes:
        return self._entries[digest]

    def __contains__(self, digest: str) -> bool:
        return digest in self._entries

    def __len__(self) -> int:
        return len(self._entries)


@dataclass(frozen=True)
class Scenario:
    seed: int
    universe: tuple[str, ...]
    user_attrs: tuple[tuple[str, ...], ...]
    policy: str
    message: bytes = b"shared payload"
    dcs_strategy: str = "honest"
    du_challenges_honest: bool = False
    du_index: int = 1                      # 1-based; the task creator
    reward: int = 100
    opening_balance: int = 250
    window: int = 10
    backend: str = "mock"
    levels: Optional[int] = None

    def __post_init__(self):
        if self.dcs_strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.dcs_strategy!r}")
        if not 1 <= self.du_index <= len(self.user_attrs):
            raise ValueError("du_index outside the registered users")
        bad = {a for attrs in self.user_attrs for a in attrs} - set(self.universe)
        if bad:
            raise ValueError(f"user attributes outside the universe: {sorted(bad)}")
        if self.levels is not None and (1 << self.levels) < self.users:
            raise ValueError(f"levels={self.levels} cannot hold {self.users} users")

    @property
    def users(self) -> int:
        return len(self.user_attrs)

    def effective_levels(self) -> int:
        need = max((self.users - 1).bit_length(), 0) if self.users > 1 else 0
        levels = need if self.levels is None else self.levels
        if (1 << levels) < self.users:
            raise ValueError(f"levels={levels} cannot hold {self.users} users")
        return levels


@dataclass
class ScenarioReport:
    outcome: str                           # delivered | refunded | solver-paid-despite-challenge
    message_recovered: bool
    verdict: Optional[int]
    task_status: str
    balances: dict[str, int]
    events: list[Event]
    op_counters: dict[str, int]
    phase_timings: dict[str, float]
    ledger: Ledger = field(repr=False)
    store: ContentStore = field(repr=False)
    result_correct: Optional[bool] = None  # post-hoc honest re-check of the stored result


def published_tag(ct: full.MultiCiphertext) -> bytes:
    h = hashlib.sha256()
    for component in ct.components:
        if component is not None:
            h.update(component.tag)
    return h.digest()


def pv_verify(
    backend,
    result_bytes: bytes,
    proof_bytes: bytes,
    ct: full.MultiCiphertext,
    du_public: full.UserPublicKey,
    chain_tag: bytes,
) -> int:
    """The verifier's ruling: 1 convicts the solver, 0 clears it.

    An undecodable result convicts without touching the DLEQ check; an
    undecodable accusation, or a published tag that does not match the
    stored ciphertext, never convicts.
    """
    if chain_tag != published_tag(ct):
        return 0
    try:
        ct_prime, instance = serial.unpack_transform(result_bytes, backend)
    except SerialError:
        return 1
    if instance is None or not 0 <= instance < len(ct.components) or ct.components[instance] is None:
        return 1
    try:
        proof = serial.unpack_fraud_proof(proof_bytes, backend)
    except SerialError:
        return 0
    pk_t = du_public.publics[instance].t
    return fraud.fraud_verify(proof, ct_prime, ct.components[instance], pk_t)


class _Run:
    """Single scenario execution; phases mutate this context in order."""

    def __init__(self, scenario: Scenario, check_keys: bool):
        self.scenario = scenario
        self.check_keys = check_keys
        self.backend = get_backend(scenario.backend)
        import random

        self.rng = random.Random(scenario.seed)
        self.store = ContentStore()
        self.ledger = Ledger(
            balances={DU: scenario.opening_balance, DO: 0, DCS: 0, KC: 0, PV: 0},
            pv_account=PV,
            window=scenario.window,
        )
        self.timings: dict[str, float] = {}
        self.user_keys: list[full.UserKeys] = []
        self.verdict: Optional[int] = None
        self.message_recovered = False
        self.outcome = "refunded"
        self.task_id: Optional[int] = None
        self.result_correct: Optional[bool] = None

    def _phase(self, name: str):
        class _Timer:
            def __enter__(timer):
                timer.start = time.perf_counter()

            def __exit__(timer, *exc):
                self.timings[name] = time.perf_counter() - timer.start

        return _Timer()

    # -- phases ----------------------------------------------------------

    def setup_and_register(self):
        sc = self.scenario
        with self._phase("setup"):
            self.crs = full.setup(self.backend, sc.effective_levels(), sc.universe, self.rng)
            self.aux = full.new_aux(self.crs)
        with self._phase("registration"):
            for attrs in sc.user_attrs:
                keys = full.keygen(self.crs, self.aux, self.rng)
                self.user_keys.append(keys)
                self.master, self.aux = full.register(
                    self.crs, self.aux, keys.public, attrs, check_keys=self.check_keys
                )
                pk_digest = self.store.put(serial.pack_user_public(keys.public, self.backend.name))
                aux_digest = self.store.put(serial.pack_aux(self.aux, self.backend.name))
                self.ledger.publish_state(KC, self.aux.ctr, pk_digest, aux_digest)

    def encrypt_and_publish(self):
        sc = self.scenario
        with self._phase("encrypt"):
            self.ct = full.encrypt(self.master, sc.policy, sc.message, self.rng)
            ct_bytes = serial.pack_multi_ciphertext(self.ct, self.backend.name, self.backend.order)
            self.ct_id = self.store.put(ct_bytes)
            self.chain_tag = published_tag(self.ct)
            self.ledger.publish_tag(DO, self.ct_id, self.chain_tag)

    def create_task(self):
        with self._phase("task"):
            self.task_id = self.ledger.create_task(DU, self.ct_id, self.scenario.reward)

    def dcs_round(self) -> bool:
        """Fetch, transform, corrupt per strategy, submit.  False = no submission."""
        sc = self.scenario
        with self._phase("transform"):
            ct = serial.unpack_multi_ciphertext(self.store.get(self.ct_id), self.backend)
            du_public = self.user_keys[sc.du_index - 1].public
            bundle = full.update(self.crs, self.aux, du_public)
            outcome = full.transform_full(bundle, ct) if bundle else None
            if outcome is None or not outcome.ok:
                return False
            self.instance = outcome.instance
            self.honest_result = serial.pack_transform(outcome.ct_prime, instance=outcome.instance)
            if sc.dcs_strategy == "honest":
                result = self.honest_result
            elif sc.dcs_strategy == "garbage":
                result = self.rng.randbytes(64)
            else:
                noise = self.backend.random_target(self.rng)
                if sc.dcs_strategy == "corrupt-C1":
                    bad = slotted.TransformCiphertext(outcome.ct_prime.c1 * noise, outcome.ct_prime.c2)
                else:
                    bad = slotted.TransformCiphertext(outcome.ct_prime.c1, outcome.ct_prime.c2 * noise)
                result = serial.pack_transform(bad, instance=outcome.instance)
            self.ledger.submit_result(DCS, self.task_id, result)
        return True

    def du_round(self):
        """Local decryption; decide between settling and disputing."""
        sc = self.scenario
        task = self.ledger.tasks[self.task_id]
        with self._phase("decrypt"):
            decoded = None
            try:
                ct_prime, instance = serial.unpack_transform(task.result, self.backend)
                if instance is not None and self.ct.components[instance] is not None:
                    decoded = (ct_prime, instance)
            except SerialError:
                decoded = None
            keys = self.user_keys[sc.du_index - 1]
            plain = None
            if decoded is not None:
                plain = full.decrypt_with(keys, decoded[1], decoded[0], self.ct)
            self.message_recovered = plain == sc.message and plain is not None

        if self.message_recovered and not sc.du_challenges_honest:
            with self._phase("settle"):
                self.ledger.advance_block(sc.window)
                self.ledger.claim_reward(DCS, self.task_id)
                self.outcome = "delivered"
            return

        with self._phase("dispute"):
            if decoded is not None:
                ct_prime, instance = decoded
                proof = fraud.fraud_prove(
                    keys.sk(instance), ct_prime, keys.pairs[instance].public.t, self.rng
                )
                proof_bytes = serial.pack_fraud_proof(proof)
            else:
                proof_bytes = b""    # undecodable result; the decode-failure rule applies
            self.ledger.publish_fraud_proof(DU, self.task_id, proof_bytes)
            stored = self.ledger.tasks[self.task_id]
            ct = serial.unpack_multi_ciphertext(self.store.get(self.ct_id), self.backend)
            self.verdict = pv_verify(
                self.backend,
                stored.result,
                stored.proof,
                ct,
                self.user_keys[sc.du_index - 1].public,
                self.ledger.tag_log[self.ct_id],
            )
            self.ledger.publish_verification_result(PV, self.task_id, self.verdict)
            self.outcome = "refunded" if self.verdict == 1 else "solver-paid-despite-challenge"

    def timeout_round(self):
        with self._phase("timeout"):
            self.ledger.advance_block(2 * self.scenario.window)
            self.ledger.cancel_task(DU, self.task_id)
            self.outcome = "refunded"

    def recheck_result(self):
        """Post-hoc fairness oracle: would an honest accusation convict?"""
        task = self.ledger.tasks[self.task_id]
        if task.result is None:
            self.result_correct = None
            return
        sc = self.scenario
        keys = self.user_keys[sc.du_index - 1]
        try:
            ct_prime, instance = serial.unpack_transform(task.result, self.backend)
            assert instance is not None and self.ct.components[instance] is not None
        except (SerialError, AssertionError):
            self.result_correct = False
            return
        proof = fraud.fraud_prove(
            keys.sk(instance), ct_prime, keys.pairs[instance].public.t, self.rng
        )
        self.result_correct = (
            fraud.fraud_verify(proof, ct_prime, self.ct.components[instance],
                               keys.pairs[instance].public.t) == 0
        )

    def report(self) -> ScenarioReport:
        return ScenarioReport(
            outcome=self.outcome,
            message_recovered=self.message_recovered,
            verdict=self.verdict,
            task_status=self.ledger.tasks[self.task_id].status if self.task_id else "none",
            balances=dict(self.ledger.balances),
            events=list(self.ledger.event_log),
            op_counters=dict(self.ledger.op_counters),
            phase_timings=dict(self.timings),
            ledger=self.ledger,
            store=self.store,
            result_correct=self.result_correct,
        )


def run_scenario(scenario: Scenario, check_keys: bool = True) -> ScenarioReport:
    """Execute one full trace: registration through task resolution."""
    run = _Run(scenario, check_keys)
    run.setup_and_register()
    run.encrypt_and_publish()
    run.create_task()
    if run.dcs_round():
        run.du_round()
        run.recheck_result()
    else:
        run.timeout_round()
    return run.report()


def run_happy_case(scenario: Scenario, check_keys: bool = True) -> ScenarioReport:
    """Honest-server flow; asserts delivery whenever a transform exists."""
    if scenario.dcs_strategy != "honest" or scenario.du_challenges_honest:
        raise ValueError("happy case requires an honest server and a settling consumer")
    report = run_scenario(scenario, check_keys=check_keys)
    if report.task_status == RESOLVED_PAID:
        _check("decrypt", report.message_recovered, "consumer failed to recover the message")
        _check(
            "settle",
            report.balances[DCS] == scenario.reward,
            f"solver balance {report.balances[DCS]} != reward {scenario.reward}",
        )
        _check("outcome", report.outcome == "delivered", report.outcome)
    else:
        _check("timeout", report.outcome == "refunded", report.outcome)
        _check(
            "timeout",
            report.balances[DU] == scenario.opening_balance,
            "escrow was not reclaimed on the timeout path",
        )
    return report


def run_dispute_case(scenario: Scenario, check_keys: bool = True) -> ScenarioReport:
    """Dispute flow; asserts the verdict matching the server strategy."""
    if scenario.dcs_strategy == "honest" and not scenario.du_challenges_honest:
        raise ValueError("dispute case needs a corrupt server or a challenging consumer")
    report = run_scenario(scenario, check_keys=check_keys)
    if scenario.dcs_strategy == "honest":
        _check("verdict", report.verdict == 0, f"honest result convicted: verdict {report.verdict}")
        _check("outcome", report.outcome == "solver-paid-despite-challenge", report.outcome)
        _check("settle", report.balances[DCS] == scenario.reward, "exonerated solver unpaid")
    else:
        _check("verdict", report.verdict == 1, f"corrupt result acquitted: verdict {report.verdict}")
        _check("outcome", report.outcome == "refunded", report.outcome)
        _check("refund", report.balances[DU] == scenario.opening_balance, "consumer not refunded")
        _check("refund", report.balances[DCS] == 0, "corrupt solver was paid")
    return report


# ----------------------------------------------------------------------
# Trace fuzzing
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class FuzzSummary:
    traces: int
    outcomes: tuple[tuple[str, int], ...]
    conserved: bool
    fair: bool
    digest: str


def random_policy(rng, attrs: tuple[str, ...], max_leaves: int = 6) -> str:
    leaves = rng.randint(1, max_leaves)

    def build(n: int) -> str:
        if n == 1:
            return rng.choice(attrs)
        split = rng.randint(1, n - 1)
        op = rng.choice(("and", "or"))
        return f"({build(split)} {op} {build(n - split)})"

    return build(leaves)


def fuzz_traces(n: int, seed: int, backend: str = "mock", max_levels: int = 2) -> FuzzSummary:
    """Randomized end-to-end traces asserting fairness and conservation.

    Deterministic in (n, seed): reruns yield an identical summary.
    """
    import random

    rng = random.Random(seed)
    outcome_counts: dict[str, int] = {}
    fair = True
    conserved = True
    h = hashlib.sha256()
    for index in range(n):
        universe = tuple(f"attr{i}" for i in range(rng.randint(1, 4)))
        users = rng.randint(1, 1 << rng.randint(0, max_levels))
        user_attrs = tuple(
            tuple(a for a in universe if rng.random() < 0.6) for _ in range(users)
        )
        scenario = Scenario(
            seed=rng.randrange(2**32),
            universe=universe,
            user_attrs=user_attrs,
            policy=random_policy(rng, universe),
            message=rng.randbytes(rng.randint(0, 40)),
            dcs_strategy=rng.choice(STRATEGIES),
            du_challenges_honest=rng.random() < 0.15,
            du_index=rng.randint(1, users),
            reward=rng.randint(1, 120),
            opening_balance=200,
            window=rng.randint(2, 12),
            backend=backend,
        )
        report = run_scenario(scenario, check_keys=False)
        outcome_counts[report.outcome] = outcome_counts.get(report.outcome, 0) + 1

        total = sum(report.balances.values()) + report.ledger.escrowed()
        if total != scenario.opening_balance:
            conserved = False
        solver_paid = report.balances[DCS] > 0
        if report.result_correct is not None and solver_paid != report.result_correct:
            fair = False
        h.update(f"{index}:{report.outcome}:{sorted(report.balances.items())}".encode())
    return FuzzSummary(
        traces=n,
        outcomes=tuple(sorted(outcome_counts.items())),
        conserved=conserved,
        fair=fair,
        digest=h.hexdigest(),
    )
