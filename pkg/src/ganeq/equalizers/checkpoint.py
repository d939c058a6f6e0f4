"""Portable JSON checkpoints: a flat list of named parameter arrays.

Each record carries ``kind`` (model kind), ``layer_index`` (position of the
layer the parameter belongs to), ``role`` (weight, bias, ...), ``shape`` and
the row-major ``values``.
"""
import json

import numpy as np

FORMAT_VERSION = 1


def _split(name):
    layer, _, role = name.rpartition(".")
    return layer or name, role or name


def to_records(model):
    records, layers = [], []
    for name, p in model.named_parameters():
        layer, role = _split(name)
        if layer not in layers:
            layers.append(layer)
        records.append({
            "kind": model.kind,
            "layer_index": layers.index(layer),
            "layer": layer,
            "role": role,
            "shape": list(p.shape),
            "values": p.data.ravel().tolist(),
        })
    if hasattr(model, "w") and not model.named_parameters():
        # LMS keeps its taps outside the tape
        w = np.asarray(model.w)
        records.append({"kind": model.kind, "layer_index": 0, "layer": "fir", "role": "weight",
                        "shape": list(w.shape), "values": w.ravel().tolist()})
    return records


def save_checkpoint(model, path):
    doc = {"format": FORMAT_VERSION, "kind": model.kind, "parameters": to_records(model)}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)


def load_records(model, records):
    """Copy parameter values from ``records`` into ``model`` (shapes must match)."""
    params = dict(model.named_parameters())
    for r in records:
        if r["kind"] != model.kind:
            raise ValueError(f"checkpoint holds a {r['kind']} model, not {model.kind}")
        values = np.asarray(r["values"], dtype=np.float64).reshape(r["shape"])
        if not params and r["layer"] == "fir":
            model.w = values.copy()
            continue
        name = f"{r['layer']}.{r['role']}" if r["layer"] != r["role"] else r["role"]
        if name not in params:
            raise KeyError(f"model has no parameter {name!r}")
        p = params[name]
        if tuple(r["shape"]) != p.shape:
            raise ValueError(f"{name}: checkpoint shape {tuple(r['shape'])} != model shape {p.shape}")
        p.data[...] = values
    return model


def load_checkpoint(model, path):
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    return load_records(model, doc["parameters"])
