"""Artifact serialization: versioned binary containers and JSON envelopes.

Every persisted object (CRS, keys, aux snapshots, ciphertexts, transform
results, fraud proofs) is a container:

    magic "RGAB" | version u8 | kind | backend id | section table

where kind/backend are length-prefixed UTF-8 and the section table is a
sequence of named byte sections.  Strings, integers and nesting inside a
section use a small tagged tree encoding (N/I/B/S/L/D) with 4-byte
big-endian lengths throughout, which keeps encodings canonical and makes
artifact sizes an exact function of their shape.

The same container converts losslessly to a hex-armored JSON envelope
for CLI interchange; ``parse`` sniffs which of the two it is given.

Group elements appear inside trees as their canonical framed bytes and
are rebound to a backend on unpacking; a container whose recorded
backend disagrees with the supplied one is rejected.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

from . import full, slotted
from .algebra import LsssMatrix, ProgressionFreeSet
from .fraud import DleqProof, FraudProof
from .groups import GroupBackend, SourceElement, TargetElement

MAGIC = b"RGAB"
VERSION = 1


class SerialError(ValueError):
    """Malformed container, envelope, or section payload."""


# ----------------------------------------------------------------------
# Tagged tree encoding
# ----------------------------------------------------------------------


def _len4(n: int) -> bytes:
    return n.to_bytes(4, "big")


def encode_tree(value) -> bytes:
    out = bytearray()
    _enc(value, out)
    return bytes(out)


def _enc(value, out: bytearray) -> None:
    if value is None:
        out += b"N"
    elif isinstance(value, bool):
        raise SerialError("booleans are not part of the wire format")
    elif isinstance(value, int):
        if value < 0:
            raise SerialError("tree integers are non-negative")
        mag = value.to_bytes((value.bit_length() + 7) // 8 or 1, "big")
        out += b"I" + _len4(len(mag)) + mag
    elif isinstance(value, (bytes, bytearray)):
        out += b"B" + _len4(len(value)) + bytes(value)
    elif isinstance(value, str):
        raw = value.encode()
        out += b"S" + _len4(len(raw)) + raw
    elif isinstance(value, (list, tuple)):
        out += b"L" + _len4(len(value))
        for item in value:
            _enc(item, out)
    elif isinstance(value, dict):
        out += b"D" + _len4(len(value))
        for key, item in value.items():
            if not isinstance(key, str):
                raise SerialError("tree dict keys must be strings")
            raw = key.encode()
            out += _len4(len(raw)) + raw
            _enc(item, out)
    else:
        raise SerialError(f"cannot encode {type(value).__name__}")


def decode_tree(data: bytes):
    value, offset = _dec(data, 0)
    if offset != len(data):
        raise SerialError("trailing bytes after tree")
    return value


def _take(data: bytes, offset: int, n: int) -> tuple[bytes, int]:
    if offset + n > len(data):
        raise SerialError("truncated tree")
    return data[offset:offset + n], offset + n


def _dec(data: bytes, offset: int):
    tag, offset = _take(data, offset, 1)
    if tag == b"N":
        return None, offset
    if tag == b"I":
        raw, offset = _take(data, offset, 4)
        mag, offset = _take(data, offset, int.from_bytes(raw, "big"))
        return int.from_bytes(mag, "big"), offset
    if tag == b"B":
        raw, offset = _take(data, offset, 4)
        payload, offset = _take(data, offset, int.from_bytes(raw, "big"))
        return payload, offset
    if tag == b"S":
        raw, offset = _take(data, offset, 4)
        payload, offset = _take(data, offset, int.from_bytes(raw, "big"))
        return payload.decode(), offset
    if tag == b"L":
        raw, offset = _take(data, offset, 4)
        out = []
        for _ in range(int.from_bytes(raw, "big")):
            item, offset = _dec(data, offset)
            out.append(item)
        return out, offset
    if tag == b"D":
        raw, offset = _take(data, offset, 4)
        out = {}
        for _ in range(int.from_bytes(raw, "big")):
            klen, offset = _take(data, offset, 4)
            key, offset = _take(data, offset, int.from_bytes(klen, "big"))
            item, offset = _dec(data, offset)
            out[key.decode()] = item
        return out, offset
    raise SerialError(f"unknown tree tag {tag!r}")


# ----------------------------------------------------------------------
# Containers and envelopes
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class Artifact:
    kind: str
    backend: str
    sections: dict[str, bytes]


def pack_container(artifact: Artifact) -> bytes:
    out = bytearray(MAGIC)
    out.append(VERSION)
    for text in (artifact.kind, artifact.backend):
        raw = text.encode()
        out += _len4(len(raw)) + raw
    out += _len4(len(artifact.sections))
    for name, payload in artifact.sections.items():
        raw = name.encode()
        out += _len4(len(raw)) + raw + _len4(len(payload)) + payload
    return bytes(out)


def _parse_container(data: bytes) -> Artifact:
    if data[:4] != MAGIC:
        raise SerialError("bad magic")
    if data[4] != VERSION:
        raise SerialError(f"unsupported container version {data[4]}")
    offset = 5

    def take_str(off):
        raw, off = _take(data, off, 4)
        payload, off = _take(data, off, int.from_bytes(raw, "big"))
        return payload.decode(), off

    kind, offset = take_str(offset)
    backend, offset = take_str(offset)
    raw, offset = _take(data, offset, 4)
    sections = {}
    for _ in range(int.from_bytes(raw, "big")):
        name, offset = take_str(offset)
        raw2, offset = _take(data, offset, 4)
        payload, offset = _take(data, offset, int.from_bytes(raw2, "big"))
        sections[name] = payload
    if offset != len(data):
        raise SerialError("trailing bytes after container")
    return Artifact(kind, backend, sections)


def to_json_envelope(data: bytes) -> str:
    art = _parse_container(data)
    return json.dumps(
        {
            "magic": MAGIC.decode(),
            "version": VERSION,
            "kind": art.kind,
            "backend": art.backend,
            "sections": {name: payload.hex() for name, payload in art.sections.items()},
        },
        indent=2,
        sort_keys=True,
    )


def parse(data: bytes) -> Artifact:
    """Accept either a binary container or its JSON envelope."""
    if data[:4] == MAGIC:
        return _parse_container(data)
    try:
        doc = json.loads(data.decode())
        if doc.get("magic") != MAGIC.decode() or doc.get("version") != VERSION:
            raise SerialError("bad envelope header")
        return Artifact(
            doc["kind"],
            doc["backend"],
            {name: bytes.fromhex(payload) for name, payload in doc["sections"].items()},
        )
    except (UnicodeDecodeError, json.JSONDecodeError, KeyError, AttributeError, TypeError) as exc:
        raise SerialError(f"not a container or envelope: {exc}") from None


def content_digest(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _expect(artifact: Artifact, kind: str, backend: GroupBackend) -> None:
    if artifact.kind != kind:
        raise SerialError(f"expected a {kind} artifact, got {artifact.kind}")
    if artifact.backend != backend.name:
        raise SerialError(
            f"artifact was produced by backend {artifact.backend}, loading with {backend.name}"
        )


def _artifact(kind: str, backend_name: str, tree, extra: dict[str, bytes] | None = None) -> bytes:
    sections = {"body": encode_tree(tree)}
    if extra:
        sections.update(extra)
    return pack_container(Artifact(kind, backend_name, sections))


def _body(data: bytes, kind: str, backend: GroupBackend):
    art = parse(data)
    _expect(art, kind, backend)
    return decode_tree(art.sections["body"]), art


def _src(backend: GroupBackend, raw: bytes) -> SourceElement:
    el = backend.element_from_bytes(raw)
    if not isinstance(el, SourceElement):
        raise SerialError("expected a source-group element")
    return el


def _tgt(backend: GroupBackend, raw: bytes) -> TargetElement:
    el = backend.element_from_bytes(raw)
    if not isinstance(el, TargetElement):
        raise SerialError("expected a target-group element")
    return el


# ----------------------------------------------------------------------
# Slotted-scheme artifacts
# ----------------------------------------------------------------------


def _crs_tree(crs: slotted.CommonReferenceString) -> dict:
    return {
        "universe": list(crs.universe),
        "d": list(crs.pf_set.d),
        "z": crs.z.to_bytes(),
        "h": crs.h.to_bytes(),
        "slots": [
            {"a": s.a.to_bytes(), "b": s.b.to_bytes(), "p": s.p.to_bytes(), "u": s.u.to_bytes()}
            for s in crs.slots
        ],
        "w": {str(zv): el.to_bytes() for zv, el in crs.w.items()},
    }


def _crs_from_tree(tree: dict, backend: GroupBackend) -> slotted.CommonReferenceString:
    return slotted.CommonReferenceString(
        backend=backend,
        universe=tuple(tree["universe"]),
        z=_tgt(backend, tree["z"]),
        h=_src(backend, tree["h"]),
        slots=tuple(
            slotted.SlotCrs(
                a=_src(backend, s["a"]),
                b=_src(backend, s["b"]),
                p=_src(backend, s["p"]),
                u=_src(backend, s["u"]),
            )
            for s in tree["slots"]
        ),
        w={int(zv): _src(backend, raw) for zv, raw in tree["w"].items()},
        pf_set=ProgressionFreeSet(tuple(tree["d"])),
    )


def pack_crs(crs: slotted.CommonReferenceString) -> bytes:
    return _artifact("crs", crs.backend.name, _crs_tree(crs))


def unpack_crs(data: bytes, backend: GroupBackend) -> slotted.CommonReferenceString:
    tree, _ = _body(data, "crs", backend)
    return _crs_from_tree(tree, backend)


def _slot_public_tree(pk: slotted.SlotPublicKey) -> dict:
    return {
        "slot": pk.slot,
        "t": pk.t.to_bytes(),
        "q": pk.q.to_bytes(),
        "v": {str(j): el.to_bytes() for j, el in pk.v.items()},
    }


def _slot_public_from_tree(tree: dict, backend: GroupBackend) -> slotted.SlotPublicKey:
    return slotted.SlotPublicKey(
        slot=tree["slot"],
        t=_src(backend, tree["t"]),
        q=_src(backend, tree["q"]),
        v={int(j): _src(backend, raw) for j, raw in tree["v"].items()},
    )


def _mpk_tree(mpk: slotted.MasterPublicKey) -> dict:
    return {
        "universe": list(mpk.universe),
        "z": mpk.z.to_bytes(),
        "h": mpk.h.to_bytes(),
        "t_hat": mpk.t_hat.to_bytes(),
        "u_hat": {w: el.to_bytes() for w, el in mpk.u_hat.items()},
        "hash_ids": list(mpk.hash_ids),
    }


def _mpk_from_tree(tree: dict, backend: GroupBackend) -> slotted.MasterPublicKey:
    return slotted.MasterPublicKey(
        backend=backend,
        universe=tuple(tree["universe"]),
        z=_tgt(backend, tree["z"]),
        h=_src(backend, tree["h"]),
        t_hat=_src(backend, tree["t_hat"]),
        u_hat={w: _src(backend, raw) for w, raw in tree["u_hat"].items()},
        hash_ids=tuple(tree["hash_ids"]),
    )


def pack_mpk(mpk: slotted.MasterPublicKey) -> bytes:
    return _artifact("mpk", mpk.backend.name, _mpk_tree(mpk))


def unpack_mpk(data: bytes, backend: GroupBackend) -> slotted.MasterPublicKey:
    tree, _ = _body(data, "mpk", backend)
    return _mpk_from_tree(tree, backend)


def _helper_tree(hsk: slotted.HelperKey) -> dict:
    return {
        "slot": hsk.slot,
        "attrs": sorted(hsk.attrs),
        "a": hsk.a.to_bytes(),
        "b": hsk.b.to_bytes(),
        "v_hat": hsk.v_hat.to_bytes(),
        "w_hat": {w: el.to_bytes() for w, el in hsk.w_hat.items()},
    }


def _helper_from_tree(tree: dict, backend: GroupBackend) -> slotted.HelperKey:
    return slotted.HelperKey(
        slot=tree["slot"],
        attrs=frozenset(tree["attrs"]),
        a=_src(backend, tree["a"]),
        b=_src(backend, tree["b"]),
        v_hat=_src(backend, tree["v_hat"]),
        w_hat={w: _src(backend, raw) for w, raw in tree["w_hat"].items()},
    )


def pack_helper_key(hsk: slotted.HelperKey) -> bytes:
    return _artifact("hsk", hsk.a.backend.name, _helper_tree(hsk))


def unpack_helper_key(data: bytes, backend: GroupBackend) -> slotted.HelperKey:
    tree, _ = _body(data, "hsk", backend)
    return _helper_from_tree(tree, backend)


def _matrix_tree(matrix: LsssMatrix, order: int) -> dict:
    # sparse rows: total entry count tracks the policy size, not its square
    return {
        "width": matrix.width,
        "rows": [
            [[c, val % order] for c, val in enumerate(row) if val % order]
            for row in matrix.rows
        ],
        "attrs": list(matrix.row_attrs),
    }


def _matrix_from_tree(tree: dict, order: int) -> LsssMatrix:
    width = tree["width"]
    rows = []
    for sparse in tree["rows"]:
        row = [0] * width
        for col, val in sparse:
            if not 0 <= col < width:
                raise SerialError("matrix column out of range")
            row[col] = val if val <= order // 2 else val - order
        rows.append(tuple(row))
    return LsssMatrix(tuple(rows), tuple(tree["attrs"]))


def _ciphertext_tree(ct: slotted.Ciphertext, order: int) -> dict:
    return {
        "matrix": _matrix_tree(ct.matrix, order),
        "blob": ct.blob,
        "c1": ct.c1.to_bytes(),
        "c2": ct.c2.to_bytes(),
        "rows": [[c3.to_bytes(), c4.to_bytes()] for c3, c4 in ct.rows],
        "c5": ct.c5.to_bytes(),
        "tag": ct.tag,
    }


def _ciphertext_from_tree(tree: dict, backend: GroupBackend) -> slotted.Ciphertext:
    return slotted.Ciphertext(
        matrix=_matrix_from_tree(tree["matrix"], backend.order),
        blob=tree["blob"],
        c1=_tgt(backend, tree["c1"]),
        c2=_src(backend, tree["c2"]),
        rows=tuple((_src(backend, c3), _src(backend, c4)) for c3, c4 in tree["rows"]),
        c5=_src(backend, tree["c5"]),
        tag=tree["tag"],
    )


def pack_ciphertext(ct: slotted.Ciphertext) -> bytes:
    return _artifact("ct", ct.c2.backend.name, _ciphertext_tree(ct, ct.c2.backend.order))


def unpack_ciphertext(data: bytes, backend: GroupBackend) -> slotted.Ciphertext:
    tree, _ = _body(data, "ct", backend)
    return _ciphertext_from_tree(tree, backend)


def pack_transform(ct_prime: slotted.TransformCiphertext, instance: int | None = None) -> bytes:
    extra = {"instance": encode_tree(instance)} if instance is not None else None
    tree = {"c1": ct_prime.c1.to_bytes(), "c2": ct_prime.c2.to_bytes()}
    return _artifact("ctprime", ct_prime.c1.backend.name, tree, extra)


def unpack_transform(data: bytes, backend: GroupBackend) -> tuple[slotted.TransformCiphertext, int | None]:
    tree, art = _body(data, "ctprime", backend)
    instance = decode_tree(art.sections["instance"]) if "instance" in art.sections else None
    return (
        slotted.TransformCiphertext(c1=_tgt(backend, tree["c1"]), c2=_tgt(backend, tree["c2"])),
        instance,
    )


# ----------------------------------------------------------------------
# Fraud proofs: fixed field order (vk, C1, C2, c, z), each length-prefixed
# ----------------------------------------------------------------------


def pack_fraud_proof(proof: FraudProof) -> bytes:
    backend = proof.vk.backend
    fields = [
        proof.vk.to_bytes(),
        proof.proof.commit1.to_bytes(),
        proof.proof.commit2.to_bytes(),
        backend.scalar_to_bytes(proof.proof.challenge),
        backend.scalar_to_bytes(proof.proof.response),
    ]
    body = b"".join(_len4(len(f)) + f for f in fields)
    return pack_container(Artifact("fraudproof", backend.name, {"body": body}))


def unpack_fraud_proof(data: bytes, backend: GroupBackend) -> FraudProof:
    art = parse(data)
    _expect(art, "fraudproof", backend)
    body = art.sections["body"]
    fields = []
    offset = 0
    for _ in range(5):
        raw, offset = _take(body, offset, 4)
        payload, offset = _take(body, offset, int.from_bytes(raw, "big"))
        fields.append(payload)
    if offset != len(body):
        raise SerialError("trailing bytes in fraud proof")
    vk = _tgt(backend, fields[0])
    commit1 = _tgt(backend, fields[1])
    commit2 = _src(backend, fields[2])
    return FraudProof(
        vk=vk,
        proof=DleqProof(
            commit1=commit1,
            commit2=commit2,
            challenge=backend.scalar_from_bytes(fields[3]),
            response=backend.scalar_from_bytes(fields[4]),
        ),
    )


# ----------------------------------------------------------------------
# Full-scheme artifacts
# ----------------------------------------------------------------------


def pack_multi_crs(crs: full.MultiCrs) -> bytes:
    tree = {
        "universe": list(crs.universe),
        "instances": [_crs_tree(inst) for inst in crs.instances],
    }
    return _artifact("multicrs", crs.backend.name, tree)


def unpack_multi_crs(data: bytes, backend: GroupBackend) -> full.MultiCrs:
    tree, _ = _body(data, "multicrs", backend)
    return full.MultiCrs(
        backend=backend,
        universe=tuple(tree["universe"]),
        instances=tuple(_crs_from_tree(t, backend) for t in tree["instances"]),
    )


def pack_user_keys(keys: full.UserKeys, backend_name: str) -> bytes:
    tree = {
        "ctr": keys.ctr,
        "pairs": [
            {"sk": pair.sk, "public": _slot_public_tree(pair.public)} for pair in keys.pairs
        ],
    }
    return _artifact("userkeys", backend_name, tree)


def unpack_user_keys(data: bytes, backend: GroupBackend) -> full.UserKeys:
    tree, _ = _body(data, "userkeys", backend)
    return full.UserKeys(
        ctr=tree["ctr"],
        pairs=tuple(
            slotted.SlotKeyPair(public=_slot_public_from_tree(p["public"], backend), sk=p["sk"])
            for p in tree["pairs"]
        ),
    )


def pack_user_public(pk: full.UserPublicKey, backend_name: str) -> bytes:
    tree = {"ctr": pk.ctr, "publics": [_slot_public_tree(p) for p in pk.publics]}
    return _artifact("userpk", backend_name, tree)


def unpack_user_public(data: bytes, backend: GroupBackend) -> full.UserPublicKey:
    tree, _ = _body(data, "userpk", backend)
    return full.UserPublicKey(
        ctr=tree["ctr"],
        publics=tuple(_slot_public_from_tree(t, backend) for t in tree["publics"]),
    )


def pack_aux(aux: full.AuxState, backend_name: str) -> bytes:
    tree = {
        "ctr": aux.ctr,
        "dict1": {
            str(k): {
                str(slot): {"pk": _slot_public_tree(pk), "attrs": sorted(attrs)}
                for slot, (pk, attrs) in entries.items()
            }
            for k, entries in aux.dict1.items()
        },
        "dict2": {
            f"{user}:{k}": _helper_tree(hsk) for (user, k), hsk in sorted(aux.dict2.items())
        },
        "mpk": [None if m is None else _mpk_tree(m) for m in aux.mpk],
    }
    return _artifact("aux", backend_name, tree)


def unpack_aux(data: bytes, backend: GroupBackend) -> full.AuxState:
    tree, _ = _body(data, "aux", backend)
    dict1 = {
        int(k): {
            int(slot): (
                _slot_public_from_tree(entry["pk"], backend),
                frozenset(entry["attrs"]),
            )
            for slot, entry in entries.items()
        }
        for k, entries in tree["dict1"].items()
    }
    dict2 = {}
    for key, sub in tree["dict2"].items():
        user, k = key.split(":")
        dict2[(int(user), int(k))] = _helper_from_tree(sub, backend)
    return full.AuxState(
        ctr=tree["ctr"],
        dict1=dict1,
        dict2=dict2,
        mpk=tuple(None if m is None else _mpk_from_tree(m, backend) for m in tree["mpk"]),
    )


def pack_multi_ciphertext(ct: full.MultiCiphertext, backend_name: str, order: int) -> bytes:
    tree = {
        "ctr": ct.ctr,
        "components": [
            None if c is None else _ciphertext_tree(c, order) for c in ct.components
        ],
    }
    return _artifact("multict", backend_name, tree)


def unpack_multi_ciphertext(data: bytes, backend: GroupBackend) -> full.MultiCiphertext:
    tree, _ = _body(data, "multict", backend)
    return full.MultiCiphertext(
        ctr=tree["ctr"],
        components=tuple(
            None if t is None else _ciphertext_from_tree(t, backend)
            for t in tree["components"]
        ),
    )
