"""Figure rendering for benchmark and simulation outputs.

Writes PNG files next to the delimited output; uses the Agg backend so
rendering works headless.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .bench import BenchRow


def render_time_figure(rows: list[BenchRow], path: str) -> None:
    attrs = [r.attrs for r in rows]
    fig, (ax_grow, ax_dec) = plt.subplots(1, 2, figsize=(9, 3.5))
    ax_grow.plot(attrs, [r.encrypt_ms for r in rows], marker="o", label="encrypt")
    ax_grow.plot(attrs, [r.transform_ms for r in rows], marker="x", label="transform")
    ax_grow.set_xlabel("policy size (attributes)")
    ax_grow.set_ylabel("time (ms)")
    ax_grow.set_title("outsourced work grows with the policy")
    ax_grow.legend()
    ax_grow.grid(True, linestyle="--", alpha=0.4)

    ax_dec.plot(attrs, [r.decrypt_ms for r in rows], marker="o", color="tab:green")
    ax_dec.set_xlabel("policy size (attributes)")
    ax_dec.set_ylabel("time (ms)")
    ax_dec.set_ylim(bottom=0)
    ax_dec.set_title("final decryption stays flat")
    ax_dec.grid(True, linestyle="--", alpha=0.4)

    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_size_figure(rows: list[BenchRow], path: str) -> None:
    attrs = [r.attrs for r in rows]
    fig, ax = plt.subplots(figsize=(5.5, 3.5))
    ax.plot(attrs, [r.ct_bytes / 1024 for r in rows], marker="o", label="ciphertext")
    ax.plot(attrs, [r.ct_prime_bytes / 1024 for r in rows], marker="x", label="transform ciphertext")
    ax.set_xlabel("policy size (attributes)")
    ax.set_ylabel("size (KiB)")
    ax.set_ylim(bottom=0)
    ax.set_title("ciphertext grows, transform output is constant")
    ax.legend()
    ax.grid(True, linestyle="--", alpha=0.4)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_ops_figure(profiles: list[tuple[int, dict[str, int]]], path: str) -> None:
    functions = sorted({fn for _, counters in profiles for fn in counters})
    attrs = [size for size, _ in profiles]
    fig, ax = plt.subplots(figsize=(6.5, 3.5))
    for fn in functions:
        ax.plot(attrs, [counters.get(fn, 0) for _, counters in profiles], marker=".", label=fn)
    ax.set_xlabel("policy size (attributes)")
    ax.set_ylabel("ledger calls per trace")
    ax.set_ylim(bottom=0)
    ax.set_title("per-function ledger usage is policy-independent")
    ax.legend(fontsize=7)
    ax.grid(True, linestyle="--", alpha=0.4)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_scenario_figure(balances: dict[str, int], op_counters: dict[str, int], path: str) -> None:
    fig, (ax_bal, ax_ops) = plt.subplots(1, 2, figsize=(9, 3.5))
    names = list(balances)
    ax_bal.bar(names, [balances[n] for n in names], color="tab:blue")
    ax_bal.set_title("final balances")
    ax_bal.set_ylabel("tokens")

    ops = sorted(op_counters.items())
    ax_ops.bar([k for k, _ in ops], [v for _, v in ops], color="tab:orange")
    ax_ops.set_title("ledger calls")
    ax_ops.tick_params(axis="x", rotation=45, labelsize=7)

    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
