"""Build both poker strategic forms, reduce them and write the results to a directory."""
import argparse
import json
from pathlib import Path

from qpoker import poker_models as pm


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="tables", help="output directory")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for tag, spec in (("sp", pm.SIMPLIFIED_POKER), ("ns", pm.NASH_SHAPLEY)):
        full = pm.strategic_form(spec)
        reduced, quot, trace = pm.eliminate(full)
        named = pm.name_survivors(spec, reduced, quot, full)
        (out / f"{tag}_trace.csv").write_text(pm.trace_to_csv(trace))
        (out / f"{tag}_reduced.json").write_text(json.dumps((named or reduced).to_json(), indent=2))
        print(f"{tag}: {len(trace)} eliminations, reduced shape {reduced.shape}")


if __name__ == "__main__":
    main()
