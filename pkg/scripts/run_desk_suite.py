"""Run the desk-scale suite and print the qualitative checks next to the summary.

    python3 scripts/run_desk_suite.py [--config configs/desk.ini] [--out results/desk]
"""

import argparse
import time

from bodyschema import config, harness


def checks(aggs):
    final = {k: {m: a.mean[m][-1] for m in harness.METRICS} for k, a in aggs.items()}
    disc = {k: a.discarded_mean for k, a in aggs.items()}
    family = [k for k in ("AL", "UCSAL", "CCSAL") if k in final]
    out = []
    if "R" in final:
        for k in family:
            out.append((f"{k} orientation < R", final[k]["rot_err_deg"] < final["R"]["rot_err_deg"]))
            out.append((f"{k} discards < R", disc[k] < disc["R"]))
    if "AL" in final:
        for k in ("UCSAL", "CCSAL"):
            if k in final:
                ratio = final[k]["cum_move_deg"] / final["AL"]["cum_move_deg"]
                out.append((f"{k} movement {ratio:.2f} x AL <= 0.7", ratio <= 0.7))
        out.append(("AL position in [5, 30] mm", 5.0 <= final["AL"]["pos_err_mm"] <= 30.0))
    for k in family:
        if f"{k}-CN" in final:
            worse = all(final[f"{k}-CN"][m] >= final[k][m] for m in ("pos_err_mm", "rot_err_deg"))
            out.append((f"{k}-CN errors >= {k}", worse))
    return out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--config", default="configs/desk.ini")
    ap.add_argument("--out", default="results/desk")
    args = ap.parse_args()
    cfg = config.load(args.config).validate()
    t = time.time()
    aggs, records = harness.run_suite(cfg)
    harness.emit_outputs(cfg, aggs, records, args.out)
    print(f"{len(records)} runs in {time.time() - t:.0f}s, outputs in {args.out}")
    for row in harness.summary_rows(aggs):
        print(f"  {row[0]:10s} pos {row[3]:6.2f} mm  rot {row[5]:5.2f} deg  move {row[7]:7.0f} deg  disc {row[9]:5.1f}")
    for name, ok in checks(aggs):
        print(f"  {'PASS' if ok else 'FAIL'}  {name}")


if __name__ == "__main__":
    main()
