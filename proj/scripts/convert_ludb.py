#!/usr/bin/env python3
"""Convert the published LUDB distribution (WFDB format) into the interchange
format consumed by `ecgseg import`.

Requires the `wfdb` package (pip install wfdb) and a local copy of the LUDB
data directory (the one containing <n>.dat / <n>.hea / per-lead annotation
files). The core toolkit never reads WFDB itself; this script is the bridge.

Usage:
    python3 scripts/convert_ludb.py /path/to/ludb/data converted/
    ecgseg import converted/ dataset/
"""

import json
import os
import sys

try:
    import wfdb
except ImportError:
    sys.exit("the wfdb package is required: pip install wfdb")

LEADS = ["i", "ii", "iii", "avr", "avl", "avf",
         "v1", "v2", "v3", "v4", "v5", "v6"]


def convert_record(data_dir: str, name: str, out_dir: str) -> str:
    record = wfdb.rdrecord(os.path.join(data_dir, name))
    if int(record.fs) != 500:
        raise ValueError(f"record {name}: expected 500 Hz, got {record.fs}")

    sig_names = [s.lower() for s in record.sig_name]
    leads = {}
    for lead in LEADS:
        idx = sig_names.index(lead)
        leads[lead] = [round(float(v), 6) for v in record.p_signal[:, idx]]

    annotations = {}
    for lead in LEADS:
        try:
            ann = wfdb.rdann(os.path.join(data_dir, name), extension=lead)
        except FileNotFoundError:
            continue
        waves = []
        onset = None
        for sample, symbol in zip(ann.sample, ann.symbol):
            if symbol == "(":
                onset = int(sample)
                peak = None
            elif symbol in ("p", "N", "t"):
                peak = int(sample)
                wave_type = {"p": "p", "N": "qrs", "t": "t"}[symbol]
            elif symbol == ")" and onset is not None and peak is not None:
                waves.append([wave_type, onset, peak, int(sample)])
                onset = None
                peak = None
        if waves:
            annotations[lead] = waves

    doc = {
        "patient_id": f"p{int(name):04d}",
        "fs": 500,
        "leads": leads,
        "annotations": annotations,
    }
    file_name = f"{doc['patient_id']}.json"
    with open(os.path.join(out_dir, file_name), "w") as f:
        json.dump(doc, f)
    return file_name


def main() -> None:
    if len(sys.argv) != 3:
        sys.exit(__doc__)
    data_dir, out_dir = sys.argv[1], sys.argv[2]
    os.makedirs(out_dir, exist_ok=True)

    names = sorted(
        {f.split(".")[0] for f in os.listdir(data_dir) if f.endswith(".hea")},
        key=int,
    )
    if not names:
        sys.exit(f"no .hea records found in {data_dir}")

    files = [convert_record(data_dir, name, out_dir) for name in names]
    with open(os.path.join(out_dir, "manifest.json"), "w") as f:
        json.dump({"records": files, "split_seed": 1}, f, indent=2)
    print(f"converted {len(files)} records into {out_dir}")


if __name__ == "__main__":
    main()
