"""Serialization of channels and generators to nested key-value documents.

Documents are plain dicts written as JSON.  Complex matrix entries are
encoded as [re, im] pairs and dimensions are explicit.  Rates round-trip
bit-exactly because JSON float text uses repr, which is lossless for IEEE
doubles; only the named builtin coefficient families (constant,
cosine-squared, exponential) are serializable.
"""

from __future__ import annotations

import json

import numpy as np

from .channels import (
    ConstantCoefficient,
    CosineSquaredCoefficient,
    ExponentialCoefficient,
    JumpTerm,
    LindbladGenerator,
    QuantumChannel,
    TailGuard,
)

__all__ = [
    "SerializationError",
    "matrix_to_document",
    "matrix_from_document",
    "channel_to_document",
    "channel_from_document",
    "generator_to_document",
    "generator_from_document",
    "dump",
    "load",
]


class SerializationError(ValueError):
    pass


def matrix_to_document(matrix) -> list:
    m = np.asarray(matrix, dtype=complex)
    return [[[float(v.real), float(v.imag)] for v in row] for row in m]


def matrix_from_document(doc) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in doc])


def _rate_to_document(rate) -> dict:
    if isinstance(rate, ConstantCoefficient):
        return {"type": "constant", "value": rate.value}
    if isinstance(rate, CosineSquaredCoefficient):
        return {"type": "cosine_squared", "omega": rate.omega, "scale": rate.scale}
    if isinstance(rate, ExponentialCoefficient):
        return {"type": "exponential", "decay": rate.decay, "scale": rate.scale}
    if isinstance(rate, (int, float)):
        return {"type": "constant", "value": float(rate)}
    raise SerializationError(
        f"rate {rate!r} is not one of the named serializable coefficient families"
    )


def _rate_from_document(doc: dict):
    kind = doc.get("type")
    if kind == "constant":
        return ConstantCoefficient(doc["value"])
    if kind == "cosine_squared":
        return CosineSquaredCoefficient(omega=doc["omega"], scale=doc.get("scale", 1.0))
    if kind == "exponential":
        return ExponentialCoefficient(decay=doc["decay"], scale=doc.get("scale", 1.0))
    raise SerializationError(f"unknown rate tag {kind!r}")


def channel_to_document(channel: QuantumChannel) -> dict:
    return {
        "kind": "quantum_channel",
        "dim_in": channel.dim_in,
        "dim_out": channel.dim_out,
        "kraus": [matrix_to_document(k) for k in channel.kraus],
    }


def channel_from_document(doc: dict) -> QuantumChannel:
    if doc.get("kind") != "quantum_channel":
        raise SerializationError(f"not a channel document: kind={doc.get('kind')!r}")
    kraus = [matrix_from_document(k) for k in doc["kraus"]]
    channel = QuantumChannel(kraus)
    if channel.dim_in != doc["dim_in"] or channel.dim_out != doc["dim_out"]:
        raise SerializationError("declared dimensions disagree with Kraus shapes")
    return channel


def generator_to_document(generator: LindbladGenerator) -> dict:
    if generator.hamiltonian is None:
        hamiltonian = None
    elif callable(generator.hamiltonian):
        raise SerializationError("time-dependent Hamiltonians are not serializable")
    else:
        hamiltonian = matrix_to_document(generator.hamiltonian)
    jumps = []
    for term in generator.jumps:
        if callable(term.operator) and not isinstance(term.operator, np.ndarray):
            raise SerializationError("time-dependent jump operators are not serializable")
        jumps.append({
            "rate": _rate_to_document(term.rate),
            "operator": matrix_to_document(term.operator),
        })
    doc = {
        "kind": "lindblad_generator",
        "dim": generator.dim,
        "hamiltonian": hamiltonian,
        "jumps": jumps,
    }
    if generator.tail_guard is not None:
        doc["tail_guard"] = {
            "levels": generator.tail_guard.levels,
            "bound": generator.tail_guard.bound,
        }
    return doc


def generator_from_document(doc: dict) -> LindbladGenerator:
    if doc.get("kind") != "lindblad_generator":
        raise SerializationError(f"not a generator document: kind={doc.get('kind')!r}")
    hamiltonian = None if doc["hamiltonian"] is None else matrix_from_document(doc["hamiltonian"])
    jumps = [
        JumpTerm(_rate_from_document(j["rate"]), matrix_from_document(j["operator"]))
        for j in doc["jumps"]
    ]
    guard = doc.get("tail_guard")
    tail_guard = TailGuard(levels=guard["levels"], bound=guard["bound"]) if guard else None
    return LindbladGenerator(doc["dim"], hamiltonian=hamiltonian, jumps=jumps,
                             tail_guard=tail_guard)


def to_document(obj) -> dict:
    if isinstance(obj, QuantumChannel):
        return channel_to_document(obj)
    if isinstance(obj, LindbladGenerator):
        return generator_to_document(obj)
    raise SerializationError(f"cannot serialize {type(obj).__name__}")


def from_document(doc: dict):
    kind = doc.get("kind")
    if kind == "quantum_channel":
        return channel_from_document(doc)
    if kind == "lindblad_generator":
        return generator_from_document(doc)
    raise SerializationError(f"unknown document kind {kind!r}")


def dump(obj, path) -> None:
    with open(path, "w") as fh:
        json.dump(to_document(obj), fh, indent=1)
        fh.write("\n")


def load(path):
    with open(path) as fh:
        return from_document(json.load(fh))
