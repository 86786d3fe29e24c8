r"""JSON encoding of the library's value types.

Complex numbers are written as ``[re, im]`` pairs everywhere; matrices are
row-major nested lists of such pairs. Real scalars are plain numbers.
"""

import json

import numpy as np

from canonfock.errors import ShapeMismatch, ValidationError
from canonfock.fockrep import UltracoherentVector, WeylDisplacement
from canonfock.symplectic import RotationGenerator, SqueezeGenerator, SymplecticPair


def encode_complex(a):
    """Array (any rank) or scalar -> nested lists with ``[re, im]`` leaves."""
    a = np.asarray(a, dtype=complex)
    if a.ndim == 0:
        return [float(a.real), float(a.imag)]
    return [encode_complex(x) for x in a]


def _pair_tree_ok(obj, ndim):
    arr = np.asarray(obj, dtype=float)
    return arr.ndim == ndim + 1 and arr.shape[-1] == 2


def decode_matrix(obj):
    if isinstance(obj, list) and obj and isinstance(obj[0], list) and obj[0] and isinstance(obj[0][0], list):
        if not _pair_tree_ok(obj, 2):
            raise ShapeMismatch("matrix entries must be [re, im] pairs")
        a = np.asarray(obj, dtype=float)
        return a[..., 0] + 1j * a[..., 1]
    out = np.asarray(obj, dtype=complex)
    if out.ndim != 2:
        raise ShapeMismatch(f"expected a matrix, got rank {out.ndim}")
    return out


def decode_vector(obj):
    if isinstance(obj, list) and obj and isinstance(obj[0], list):
        if not _pair_tree_ok(obj, 1):
            raise ShapeMismatch("vector entries must be [re, im] pairs")
        a = np.asarray(obj, dtype=float)
        return a[:, 0] + 1j * a[:, 1]
    out = np.asarray(obj, dtype=complex)
    if out.ndim != 1:
        raise ShapeMismatch(f"expected a vector, got rank {out.ndim}")
    return out


def decode_scalar(obj):
    if isinstance(obj, list):
        if len(obj) != 2:
            raise ShapeMismatch("complex scalar must be [re, im]")
        return complex(obj[0], obj[1])
    return complex(obj)


def to_dict(obj):
    """Encode a library value as a JSON-ready dict tagged with ``type``."""
    if isinstance(obj, SymplecticPair):
        return {"type": "SymplecticPair", "U": encode_complex(obj.U), "V": encode_complex(obj.V)}
    if isinstance(obj, RotationGenerator):
        return {"type": "RotationGenerator", "Psi": encode_complex(obj.Psi)}
    if isinstance(obj, SqueezeGenerator):
        return {"type": "SqueezeGenerator", "Xi": encode_complex(obj.Xi)}
    if isinstance(obj, UltracoherentVector):
        return {
            "type": "UltracoherentVector",
            "log_amp": encode_complex(obj.log_amp),
            "Z": encode_complex(obj.Z),
            "f": encode_complex(obj.f),
        }
    if isinstance(obj, WeylDisplacement):
        return {"type": "WeylDisplacement", "h": encode_complex(obj.h)}
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def pair_from_dict(d):
    return SymplecticPair(decode_matrix(d["U"]), decode_matrix(d["V"]))


def rotation_from_dict(d):
    return RotationGenerator(decode_matrix(d["Psi"]))


def squeeze_from_dict(d):
    return SqueezeGenerator(decode_matrix(d["Xi"]))


def ultracoherent_from_dict(d):
    return UltracoherentVector(
        decode_scalar(d.get("log_amp", 0.0)), decode_matrix(d["Z"]), decode_vector(d["f"])
    )


def weyl_from_dict(d):
    return WeylDisplacement(decode_vector(d["h"]))


_DECODERS = {
    "SymplecticPair": pair_from_dict,
    "RotationGenerator": rotation_from_dict,
    "SqueezeGenerator": squeeze_from_dict,
    "UltracoherentVector": ultracoherent_from_dict,
    "WeylDisplacement": weyl_from_dict,
}


def from_dict(d, kind=None):
    """Decode a dict produced by :func:`to_dict`; ``kind`` overrides a missing ``type`` tag."""
    kind = d.get("type", kind)
    try:
        decoder = _DECODERS[kind]
    except KeyError:
        raise ValidationError(f"unknown object type {kind!r}") from None
    try:
        return decoder(d)
    except KeyError as exc:
        raise ValidationError(f"{kind} is missing field {exc.args[0]!r}") from None


def dumps(obj, **kw):
    return json.dumps(to_dict(obj), **kw)


def loads(text, kind=None):
    return from_dict(json.loads(text), kind)
