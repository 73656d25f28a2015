"""Compare the numba kernels with the pure-Python fallback.

Each path runs in its own interpreter because the switch is read at import:

    python benchmarks/bench_kernels.py            # both paths, side by side
    python benchmarks/bench_kernels.py --single   # current environment only
"""

import argparse
import json
import os
import subprocess
import sys
import time


def measure(n_entropy, n_backtest, mu, repeats):
    import mepp
    from mepp.backtest import generate_iid_series, score_window
    from mepp.entropy_core import lz_entropy_rate

    # compile outside the timed region
    lz_entropy_rate(generate_iid_series(50, 4, 0))
    score_window(generate_iid_series(mu + 5, 4, 0), mu)

    x = generate_iid_series(n_entropy, 4, 1)
    y = generate_iid_series(n_backtest, 4, 2)
    timings = {}
    for name, fn in [("entropy_rate", lambda: lz_entropy_rate(x)), ("backtest_mu", lambda: score_window(y, mu))]:
        best = float("inf")
        for _ in range(repeats):
            t0 = time.perf_counter()
            result = fn()
            best = min(best, time.perf_counter() - t0)
        timings[name] = {"seconds": best, "result": repr(result)}
    return {"numba": mepp.USE_NUMBA, "timings": timings}


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--n-entropy", type=int, default=50_000)
    p.add_argument("--n-backtest", type=int, default=500)
    p.add_argument("--mu", type=int, default=20)
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--single", action="store_true")
    args = p.parse_args()

    if args.single:
        print(json.dumps(measure(args.n_entropy, args.n_backtest, args.mu, args.repeats)))
        return

    rows = {}
    for label, flag in [("numba", "0"), ("fallback", "1")]:
        env = dict(os.environ, MEPP_DISABLE_NUMBA=flag)
        cmd = [sys.executable, __file__, "--single", "--n-entropy", str(args.n_entropy),
               "--n-backtest", str(args.n_backtest), "--mu", str(args.mu), "--repeats", str(args.repeats)]
        rows[label] = json.loads(subprocess.run(cmd, env=env, capture_output=True, text=True, check=True).stdout)

    print(f"{'kernel':<14}{'numba s':>12}{'fallback s':>14}{'speedup':>10}  same result")
    for name in rows["numba"]["timings"]:
        a = rows["numba"]["timings"][name]
        b = rows["fallback"]["timings"][name]
        print(f"{name:<14}{a['seconds']:>12.4f}{b['seconds']:>14.4f}{b['seconds'] / a['seconds']:>10.1f}  "
              f"{a['result'] == b['result']}")


if __name__ == "__main__":
    main()
