"""Field CSV and report JSON."""
import csv
import json
import math

import numpy as np


def _round(x, digits=12):
    if isinstance(x, dict):
        return {str(k): _round(v, digits) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_round(v, digits) for v in x]
    if isinstance(x, np.ndarray):
        return _round(x.tolist(), digits)
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not math.isfinite(x):
            return str(x)
        return float(f"{x:.{digits}g}")
    return x


def dumps_report(obj):
    return json.dumps(_round(obj), sort_keys=True, indent=2) + "\n"


def write_report(obj, path):
    with open(path, "w") as fh:
        fh.write(dumps_report(obj))


def write_field(path, sites, values):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["site_index", "value"])
        for s, v in zip(sites, values):
            w.writerow([int(s), repr(float(v))])


def read_field(path):
    sites, values = [], []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or set(reader.fieldnames) != {"site_index", "value"}:
            raise ValueError(f"{path}: expected header site_index,value")
        for row in reader:
            sites.append(int(row["site_index"]))
            values.append(float(row["value"]))
    return np.array(sites, dtype=np.int64), np.array(values)


def align_field(sites, values, support):
    """Reorder a field onto ``support`` (global site indices); every site must appear once."""
    if sites.size != support.size or np.unique(sites).size != sites.size:
        raise ValueError(f"field has {sites.size} sites, domain support has {support.size}")
    order = np.argsort(sites)
    pos = np.searchsorted(sites[order], support)
    if np.any(pos >= sites.size) or np.any(sites[order][np.minimum(pos, sites.size - 1)] != support):
        raise ValueError("field sites do not match the domain support")
    return values[order][pos]
