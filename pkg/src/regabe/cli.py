"""Command-line surface for the registered-ABE toolkit.

Artifacts move between subcommands as files, either versioned binary
containers or their hex-armored JSON envelopes (``--json`` on writes;
reads accept both).  Exit codes: 0 success, 1 domain outcome (bottom
results, capacity, rejected ledger calls), 2 malformed input or usage.
"""

from __future__ import annotations

import functools
import json
import pathlib
import random
import sys

import click

from . import actors, bench as bench_mod, fraud, full, plots, serial
from .algebra import PolicyError
from .groups import GroupError, get_backend
from .ledger import LedgerError
from .slotted import CorruptionError, SchemeError

DOMAIN_ERRORS = (SchemeError, LedgerError, CorruptionError, actors.ScenarioFailure)
INPUT_ERRORS = (serial.SerialError, PolicyError, GroupError, FileNotFoundError, IsADirectoryError)


def domain_guard(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except DOMAIN_ERRORS as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(1)
        except INPUT_ERRORS as exc:
            click.echo(f"bad input: {exc}", err=True)
            sys.exit(2)

    return wrapper


def _write(path: str, data: bytes, as_json: bool) -> None:
    out = serial.to_json_envelope(data).encode() if as_json else data
    pathlib.Path(path).write_bytes(out)


def _read(path: str) -> bytes:
    return pathlib.Path(path).read_bytes()


def _load_universe(path: str) -> tuple[str, ...]:
    lines = [line.strip() for line in pathlib.Path(path).read_text().splitlines()]
    return tuple(line for line in lines if line and not line.startswith("#"))


json_option = click.option("--json", "as_json", is_flag=True, help="write JSON envelopes instead of binary containers")
backend_option = click.option("--backend", default="mock", show_default=True, help="group backend: mock, mock-<prime>, bls12-381")
seed_option = click.option("--seed", default=0, show_default=True, type=int, help="deterministic RNG seed")


@click.group()
def cli():
    """Registered ABE with verifiable outsourced decryption."""


@cli.command()
@click.option("--l", "levels", required=True, type=int, help="capacity exponent: the system holds 2^l users")
@click.option("--universe", "universe_path", required=True, type=click.Path(exists=True), help="attribute names, one per line")
@click.option("--out", "out_dir", default=".", show_default=True, type=click.Path(file_okay=False))
@backend_option
@seed_option
@json_option
@domain_guard
def setup(levels, universe_path, out_dir, backend, seed, as_json):
    """Generate the reference string ladder and an empty registration state."""
    be = get_backend(backend)
    universe = _load_universe(universe_path)
    if not universe:
        raise serial.SerialError(f"no attributes in {universe_path}")
    rng = random.Random(seed)
    crs = full.setup(be, levels, universe, rng)
    aux = full.new_aux(crs)
    out = pathlib.Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write(out / "crs.rgab", serial.pack_multi_crs(crs), as_json)
    _write(out / "aux.rgab", serial.pack_aux(aux, be.name), as_json)
    click.echo(f"wrote {out / 'crs.rgab'} and {out / 'aux.rgab'} (capacity {crs.capacity} users, backend {be.name})")


@cli.command()
@click.option("--crs", "crs_path", required=True, type=click.Path(exists=True))
@click.option("--aux", "aux_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path(), help="key file (contains the secret key)")
@click.option("--pk-out", "pk_path", type=click.Path(), help="also write the public part separately")
@seed_option
@json_option
@domain_guard
def keygen(crs_path, aux_path, out_path, pk_path, seed, as_json):
    """Generate a user key pair for the next free registration slot."""
    crs, be = _load_crs(crs_path)
    aux = serial.unpack_aux(_read(aux_path), be)
    keys = full.keygen(crs, aux, random.Random(seed))
    _write(out_path, serial.pack_user_keys(keys, be.name), as_json)
    if pk_path:
        _write(pk_path, serial.pack_user_public(keys.public, be.name), as_json)
    click.echo(f"key pair for registration slot ctr={keys.ctr} -> {out_path}")


def _load_crs(path: str):
    art = serial.parse(_read(path))
    be = get_backend(art.backend)
    return serial.unpack_multi_crs(_read(path), be), be


def _load_user(path: str, be) -> full.UserKeys | full.UserPublicKey:
    art = serial.parse(_read(path))
    if art.kind == "userkeys":
        return serial.unpack_user_keys(_read(path), be)
    return serial.unpack_user_public(_read(path), be)


def _public_of(user) -> full.UserPublicKey:
    return user.public if isinstance(user, full.UserKeys) else user


@cli.command()
@click.option("--crs", "crs_path", required=True, type=click.Path(exists=True))
@click.option("--aux", "aux_path", required=True, type=click.Path(exists=True))
@click.option("--pk", "pk_path", required=True, type=click.Path(exists=True), help="user key or public-key file")
@click.option("--attrs", required=True, help="comma-separated attribute names")
@click.option("--no-check-keys", is_flag=True, help="skip the pairing consistency guard")
@json_option
@domain_guard
def register(crs_path, aux_path, pk_path, attrs, no_check_keys, as_json):
    """Register a user; updates the aux state file in place."""
    crs, be = _load_crs(crs_path)
    aux = serial.unpack_aux(_read(aux_path), be)
    pk = _public_of(_load_user(pk_path, be))
    attr_list = tuple(a.strip() for a in attrs.split(",") if a.strip())
    _, new_aux = full.register(crs, aux, pk, attr_list, check_keys=not no_check_keys)
    aux_bytes = serial.pack_aux(new_aux, be.name)
    _write(aux_path, aux_bytes, as_json)
    pk_digest = serial.content_digest(serial.pack_user_public(pk, be.name))
    click.echo(
        f"registered user {new_aux.ctr} "
        f"(pk digest {pk_digest[:16]}..., state digest {serial.content_digest(aux_bytes)[:16]}...)"
    )


@cli.command()
@click.option("--aux", "aux_path", required=True, type=click.Path(exists=True))
@click.option("--policy", required=True, help='e.g. "(dept_cs and role_phd) or admin"')
@click.option("--in", "in_path", required=True, type=click.Path(exists=True), help="plaintext file")
@click.option("--out", "out_path", required=True, type=click.Path())
@seed_option
@json_option
@domain_guard
def encrypt(aux_path, policy, in_path, out_path, seed, as_json):
    """Encrypt a file under an access policy."""
    art = serial.parse(_read(aux_path))
    be = get_backend(art.backend)
    aux = serial.unpack_aux(_read(aux_path), be)
    ct = full.encrypt(aux.master, policy, _read(in_path), random.Random(seed))
    data = serial.pack_multi_ciphertext(ct, be.name, be.order)
    _write(out_path, data, as_json)
    click.echo(f"ciphertext (stamp {ct.ctr}, id {serial.content_digest(data)[:16]}...) -> {out_path}")


@cli.command()
@click.option("--crs", "crs_path", required=True, type=click.Path(exists=True))
@click.option("--aux", "aux_path", required=True, type=click.Path(exists=True))
@click.option("--pk", "pk_path", required=True, type=click.Path(exists=True), help="consumer key or public-key file")
@click.option("--ct", "ct_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@json_option
@domain_guard
def transform(crs_path, aux_path, pk_path, ct_path, out_path, as_json):
    """Outsourced partial decryption on behalf of a registered consumer."""
    crs, be = _load_crs(crs_path)
    aux = serial.unpack_aux(_read(aux_path), be)
    pk = _public_of(_load_user(pk_path, be))
    ct = serial.unpack_multi_ciphertext(_read(ct_path), be)
    bundle = full.update(crs, aux, pk)
    if bundle is None:
        raise SchemeError("consumer is not registered in this state")
    outcome = full.transform_full(bundle, ct)
    if not outcome.ok:
        raise SchemeError(f"transform returned bottom: {outcome.status}")
    _write(out_path, serial.pack_transform(outcome.ct_prime, instance=outcome.instance), as_json)
    click.echo(f"transform ciphertext (instance {outcome.instance}) -> {out_path}")


@cli.command()
@click.option("--keys", "keys_path", required=True, type=click.Path(exists=True), help="user key file (with secret)")
@click.option("--ct", "ct_path", required=True, type=click.Path(exists=True))
@click.option("--ctprime", "ctp_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@domain_guard
def decrypt(keys_path, ct_path, ctp_path, out_path):
    """Final decryption; rejects transform ciphertexts that fail the tag."""
    art = serial.parse(_read(keys_path))
    be = get_backend(art.backend)
    keys = serial.unpack_user_keys(_read(keys_path), be)
    ct = serial.unpack_multi_ciphertext(_read(ct_path), be)
    ct_prime, instance = serial.unpack_transform(_read(ctp_path), be)
    if instance is None:
        raise serial.SerialError("transform file lacks its instance index")
    plain = full.decrypt_with(keys, instance, ct_prime, ct)
    if plain is None:
        raise SchemeError("bottom: transform ciphertext is invalid (tag mismatch)")
    pathlib.Path(out_path).write_bytes(plain)
    click.echo(f"recovered {len(plain)} bytes -> {out_path}")


@cli.command("fraud-prove")
@click.option("--keys", "keys_path", required=True, type=click.Path(exists=True))
@click.option("--ctprime", "ctp_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@seed_option
@json_option
@domain_guard
def fraud_prove_cmd(keys_path, ctp_path, out_path, seed, as_json):
    """Produce the public accusation material for an invalid transform."""
    art = serial.parse(_read(keys_path))
    be = get_backend(art.backend)
    keys = serial.unpack_user_keys(_read(keys_path), be)
    ct_prime, instance = serial.unpack_transform(_read(ctp_path), be)
    if instance is None:
        raise serial.SerialError("transform file lacks its instance index")
    proof = fraud.fraud_prove(
        keys.sk(instance), ct_prime, keys.pairs[instance].public.t, random.Random(seed)
    )
    _write(out_path, serial.pack_fraud_proof(proof), as_json)
    click.echo(f"fraud proof (instance {instance}) -> {out_path}")


@cli.command("fraud-verify")
@click.option("--proof", "proof_path", required=True, type=click.Path(exists=True))
@click.option("--ctprime", "ctp_path", required=True, type=click.Path(exists=True))
@click.option("--ct", "ct_path", required=True, type=click.Path(exists=True))
@click.option("--pk", "pk_path", required=True, type=click.Path(exists=True), help="accuser's key or public-key file")
@domain_guard
def fraud_verify_cmd(proof_path, ctp_path, ct_path, pk_path):
    """Arbitrate an accusation; prints verdict 1 (fraud) or 0 (no fraud)."""
    art = serial.parse(_read(proof_path))
    be = get_backend(art.backend)
    proof = serial.unpack_fraud_proof(_read(proof_path), be)
    ct_prime, instance = serial.unpack_transform(_read(ctp_path), be)
    ct = serial.unpack_multi_ciphertext(_read(ct_path), be)
    pk = _public_of(_load_user(pk_path, be))
    if instance is None or ct.components[instance] is None:
        raise serial.SerialError("transform file does not reference a usable instance")
    verdict = fraud.fraud_verify(proof, ct_prime, ct.components[instance], pk.publics[instance].t)
    click.echo(f"verdict: {verdict}")


@cli.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True), help="scenario JSON file")
@click.option("--out", "out_dir", default=".", show_default=True, type=click.Path(file_okay=False))
@click.option("--figures/--no-figures", default=False, show_default=True)
@domain_guard
def simulate(config_path, out_dir, figures):
    """Run a declarative scenario; writes report.json and events.jsonl."""
    try:
        doc = json.loads(pathlib.Path(config_path).read_text())
        scenario = actors.Scenario(
            seed=doc.get("seed", 0),
            universe=tuple(doc["universe"]),
            user_attrs=tuple(tuple(a) for a in doc["user_attrs"]),
            policy=doc["policy"],
            message=doc.get("message", "shared payload").encode(),
            dcs_strategy=doc.get("strategy", "honest"),
            du_challenges_honest=doc.get("du_challenges_honest", False),
            du_index=doc.get("du_index", 1),
            reward=doc.get("reward", 100),
            opening_balance=doc.get("opening_balance", 250),
            window=doc.get("window", 10),
            backend=doc.get("backend", "mock"),
        )
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise serial.SerialError(f"bad scenario config: {exc}") from None

    report = actors.run_scenario(scenario)
    out = pathlib.Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "events.jsonl").write_text(report.ledger.export_events_jsonl() + "\n")
    (out / "report.json").write_text(
        json.dumps(
            {
                "outcome": report.outcome,
                "message_recovered": report.message_recovered,
                "verdict": report.verdict,
                "task_status": report.task_status,
                "balances": report.balances,
                "op_counters": report.op_counters,
                "phase_timings_ms": {k: round(v * 1e3, 3) for k, v in report.phase_timings.items()},
            },
            indent=2,
            sort_keys=True,
        )
        + "\n"
    )
    if figures:
        plots.render_scenario_figure(report.balances, report.op_counters, str(out / "scenario.png"))
    click.echo(f"outcome: {report.outcome} (report in {out})")


def _parse_sizes(spec: str, step: int) -> list[int]:
    if ".." in spec:
        lo, hi = spec.split("..", 1)
        sizes = list(range(int(lo), int(hi) + 1, step))
    else:
        sizes = [int(part) for part in spec.split(",") if part]
    if not sizes or any(s < 1 for s in sizes):
        raise click.UsageError(f"bad size specification {spec!r}")
    return sizes


@cli.command("bench")
@click.option("--attrs", "attrs_spec", default="10..100", show_default=True, help='sweep, e.g. "10..100" or "10,50,100"')
@click.option("--step", default=10, show_default=True, type=int)
@click.option("--reps", default=3, show_default=True, type=int)
@click.option("--out", "out_dir", default="bench-out", show_default=True, type=click.Path(file_okay=False))
@click.option("--figures/--no-figures", default=True, show_default=True)
@backend_option
@seed_option
@domain_guard
def bench(attrs_spec, step, reps, out_dir, figures, backend, seed):
    """Sweep AND-policy sizes; emit CSV (and figures) of costs and sizes."""
    sizes = _parse_sizes(attrs_spec, step)
    out = pathlib.Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = bench_mod.run_bench(backend, sizes, reps=reps, seed=seed)
    bench_mod.write_bench_csv(rows, str(out / "bench.csv"))
    profiles = bench_mod.ledger_op_profile(sizes, seed=seed)
    bench_mod.write_ops_csv(profiles, str(out / "ledger_ops.csv"))
    if figures:
        plots.render_time_figure(rows, str(out / "times.png"))
        plots.render_size_figure(rows, str(out / "sizes.png"))
        plots.render_ops_figure(profiles, str(out / "ledger_ops.png"))
    click.echo(f"bench over {sizes} on {backend} -> {out}")
    click.echo(
        "decrypt ms: " + ", ".join(f"{r.attrs}:{r.decrypt_ms:.2f}" for r in rows)
    )


def main():
    cli(prog_name="regabe")


if __name__ == "__main__":
    main()
