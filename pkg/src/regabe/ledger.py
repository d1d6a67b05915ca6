"""Deterministic simulated ledger for outsourced-decryption escrow.

A single serialized state machine stands in for the chain: registration
state digests, ciphertext tags, decryption tasks with escrowed rewards,
a challenge window, fraud-proof arbitration by a registered verifier,
and integer token accounting.  Blocks only move via ``advance_block``;
wall-clock time is never consulted.

Every call -- accepted or rejected -- appends an event carrying the
block height, caller, function name, a digest of the arguments and the
outcome, and bumps a per-function invocation counter (the stand-in for
gas).  Rejected calls raise :class:`LedgerError` after recording and
never mutate task or balance state, so token conservation holds across
arbitrary call sequences.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Optional

TAG_BYTES = 32

OPEN = "open"
SUBMITTED = "submitted"
CHALLENGED = "challenged"
RESOLVED_PAID = "resolved-paid"
RESOLVED_REFUNDED = "resolved-refunded"
TERMINAL = (RESOLVED_PAID, RESOLVED_REFUNDED)


class LedgerError(ValueError):
    """Rejected call; state other than the event log is unchanged."""


@dataclass(frozen=True)
class Event:
    block: int
    caller: str
    function: str
    args_digest: str
    outcome: str


@dataclass
class TaskRecord:
    task_id: int
    creator: str
    ciphertext_id: str
    reward: int
    status: str = OPEN
    created_block: int = 0
    solver: Optional[str] = None
    submit_block: Optional[int] = None
    result: Optional[bytes] = None
    proof: Optional[bytes] = None
    verdict: Optional[int] = None


def _args_digest(args: dict) -> str:
    canon = {
        k: v.hex() if isinstance(v, (bytes, bytearray)) else v
        for k, v in sorted(args.items())
    }
    return hashlib.sha256(json.dumps(canon, sort_keys=True).encode()).hexdigest()


class Ledger:
    def __init__(self, balances: dict[str, int], pv_account: str, window: int = 10):
        if window < 1:
            raise ValueError("challenge window must be at least one block")
        if any(v < 0 for v in balances.values()):
            raise ValueError("negative opening balance")
        self.block_height = 0
        self.window = window
        self.pv_account = pv_account
        self.balances = dict(balances)
        self.tasks: dict[int, TaskRecord] = {}
        self.state_log: list[tuple[int, str, str]] = []
        self.tag_log: dict[str, bytes] = {}
        self.event_log: list[Event] = []
        self.op_counters: dict[str, int] = {}
        self._next_task = 1

    # -- bookkeeping ------------------------------------------------------

    def _call(self, function: str, caller: str, args: dict):
        self.op_counters[function] = self.op_counters.get(function, 0) + 1
        digest = _args_digest(args)

        def finish(outcome: str):
            self.event_log.append(Event(self.block_height, caller, function, digest, outcome))

        return finish

    def _reject(self, finish, reason: str):
        finish(f"rejected: {reason}")
        raise LedgerError(reason)

    def escrowed(self) -> int:
        return sum(t.reward for t in self.tasks.values() if t.status not in TERMINAL)

    def total_tokens(self) -> int:
        return sum(self.balances.values()) + self.escrowed()

    def export_events_jsonl(self) -> str:
        return "\n".join(
            json.dumps(
                {
                    "block": e.block,
                    "caller": e.caller,
                    "function": e.function,
                    "args_digest": e.args_digest,
                    "outcome": e.outcome,
                },
                sort_keys=True,
            )
            for e in self.event_log
        )

    # -- contract functions -----------------------------------------------

    def publish_state(self, kc_account: str, ctr: int, pk_digest: str, aux_digest: str) -> Event:
        finish = self._call(
            "publish_state", kc_account,
            {"ctr": ctr, "pk_digest": pk_digest, "aux_digest": aux_digest},
        )
        expected = self.state_log[-1][0] + 1 if self.state_log else 1
        if ctr != expected:
            self._reject(finish, f"non-consecutive registration counter {ctr}, expected {expected}")
        self.state_log.append((ctr, pk_digest, aux_digest))
        finish("ok")
        return self.event_log[-1]

    def publish_tag(self, do_account: str, ciphertext_id: str, tag: bytes) -> Event:
        finish = self._call("publish_tag", do_account, {"ciphertext_id": ciphertext_id, "tag": tag})
        if len(tag) != TAG_BYTES:
            self._reject(finish, f"tag must be {TAG_BYTES} bytes")
        if ciphertext_id in self.tag_log:
            self._reject(finish, f"tag for {ciphertext_id} already published")
        self.tag_log[ciphertext_id] = bytes(tag)
        finish("ok")
        return self.event_log[-1]

    def create_task(self, du_account: str, ciphertext_id: str, reward: int) -> int:
        finish = self._call(
            "create_task", du_account, {"ciphertext_id": ciphertext_id, "reward": reward}
        )
        if reward < 0:
            self._reject(finish, "negative reward")
        if ciphertext_id not in self.tag_log:
            self._reject(finish, f"no published tag for ciphertext {ciphertext_id}")
        if self.balances.get(du_account, 0) < reward:
            self._reject(finish, "insufficient balance for the reward escrow")
        self.balances[du_account] = self.balances.get(du_account, 0) - reward
        task_id = self._next_task
        self._next_task += 1
        self.tasks[task_id] = TaskRecord(
            task_id=task_id,
            creator=du_account,
            ciphertext_id=ciphertext_id,
            reward=reward,
            created_block=self.block_height,
        )
        finish("ok")
        return task_id

    def submit_result(self, dcs_account: str, task_id: int, result: bytes) -> Event:
        finish = self._call("submit_result", dcs_account, {"task_id": task_id, "result": result})
        task = self.tasks.get(task_id)
        if task is None:
            self._reject(finish, f"unknown task {task_id}")
        if task.status != OPEN:
            self._reject(finish, f"task is {task.status}; first submission wins")
        task.status = SUBMITTED
        task.solver = dcs_account
        task.submit_block = self.block_height
        task.result = bytes(result)
        finish("ok")
        return self.event_log[-1]

    def claim_reward(self, dcs_account: str, task_id: int) -> Event:
        finish = self._call("claim_reward", dcs_account, {"task_id": task_id})
        task = self.tasks.get(task_id)
        if task is None:
            self._reject(finish, f"unknown task {task_id}")
        if task.status != SUBMITTED:
            self._reject(finish, f"task is {task.status}")
        if dcs_account != task.solver:
            self._reject(finish, "only the solver may claim")
        if self.block_height < task.submit_block + self.window:
            self._reject(finish, "challenge window still open")
        task.status = RESOLVED_PAID
        self.balances[dcs_account] = self.balances.get(dcs_account, 0) + task.reward
        finish("ok")
        return self.event_log[-1]

    def publish_fraud_proof(self, du_account: str, task_id: int, proof: bytes) -> Event:
        finish = self._call(
            "publish_fraud_proof", du_account, {"task_id": task_id, "proof": proof}
        )
        task = self.tasks.get(task_id)
        if task is None:
            self._reject(finish, f"unknown task {task_id}")
        if task.status != SUBMITTED:
            self._reject(finish, f"task is {task.status}")
        if du_account != task.creator:
            self._reject(finish, "only the task creator may challenge")
        if self.block_height >= task.submit_block + self.window:
            self._reject(finish, "challenge window has closed")
        task.status = CHALLENGED
        task.proof = bytes(proof)
        finish("ok")
        return self.event_log[-1]

    def publish_verification_result(self, pv_account: str, task_id: int, verdict: int) -> Event:
        finish = self._call(
            "publish_verification_result", pv_account, {"task_id": task_id, "verdict": verdict}
        )
        task = self.tasks.get(task_id)
        if task is None:
            self._reject(finish, f"unknown task {task_id}")
        if pv_account != self.pv_account:
            self._reject(finish, "caller is not the registered verifier")
        if task.status != CHALLENGED:
            self._reject(finish, f"task is {task.status}")
        if verdict not in (0, 1):
            self._reject(finish, "verdict must be 0 or 1")
        task.verdict = verdict
        if verdict == 1:
            task.status = RESOLVED_REFUNDED
            self.balances[task.creator] = self.balances.get(task.creator, 0) + task.reward
        else:
            task.status = RESOLVED_PAID
            self.balances[task.solver] = self.balances.get(task.solver, 0) + task.reward
        finish("ok")
        return self.event_log[-1]

    def cancel_task(self, du_account: str, task_id: int) -> Event:
        """Reclaim escrow from a task nobody ever answered.

        Allowed to the creator once twice the challenge window has passed
        since creation; an extension beyond the contract surface needed
        to terminate no-submission traces.
        """
        finish = self._call("cancel_task", du_account, {"task_id": task_id})
        task = self.tasks.get(task_id)
        if task is None:
            self._reject(finish, f"unknown task {task_id}")
        if task.status != OPEN:
            self._reject(finish, f"task is {task.status}")
        if du_account != task.creator:
            self._reject(finish, "only the task creator may cancel")
        if self.block_height < task.created_block + 2 * self.window:
            self._reject(finish, "cancellation waits two challenge windows")
        task.status = RESOLVED_REFUNDED
        self.balances[du_account] = self.balances.get(du_account, 0) + task.reward
        finish("ok")
        return self.event_log[-1]

    def advance_block(self, n: int) -> int:
        finish = self._call("advance_block", "<clock>", {"n": n})
        if n < 1:
            self._reject(finish, "block advance must be positive")
        self.block_height += n
        finish("ok")
        return self.block_height
