"""Compiled vs pure-Python placement kernels.

    python benchmarks/bench_kernels.py [--repeat 5]

Times a dense single-segment fill (``fill_chain``) and a full uplink sweep
over 1000 segments (``segment_sweep``), then an end-to-end downlink dense
placement through the public API with each backend forced in a subprocess.
"""

from __future__ import annotations

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from swan import _kernels_py as py

try:
    from swan import _kernels as cy
except ImportError:
    cy = None

LAM = 299792458.0 / 28e9

END_TO_END = """
import timeit
from swan.downlink import DENSE, dl_place
from swan.phys import UserLocation, WaveguideLayout, make_radio_config
r = make_radio_config(28e9, 1.4, 0.08)
lay = WaveguideLayout.centered(20.0, 20, height=3.0, min_spacing=r.wavelength / 2)
u = UserLocation.on(lay, 1.3, 2.0)
print(min(timeit.repeat(lambda: dl_place("SA", u, lay, r, DENSE), number=1, repeat={repeat})))
"""


def _fill_args():
    return (0.0, 0.0, 10.0, 0.0, 1, -1, 0.0, 9.0, 1.4, LAM, 3.0, LAM / 2, True, False)


def _sweep_args():
    M, L = 1000, 1.0
    feeds = np.ascontiguousarray(-M * L / 2 + L * np.arange(M // 2, M, dtype=float))
    return (feeds, L, 0.0, 1, 0.0, 9.0, 1.4, LAM, 3.0, LAM / 2, True)


def bench(mod, repeat: int) -> dict[str, float]:
    fa, sa = _fill_args(), _sweep_args()
    return {
        "fill_chain (1183 PAs)": min(timeit.repeat(lambda: mod.fill_chain(*fa), number=1, repeat=repeat)),
        "segment_sweep (500 segs)": min(timeit.repeat(lambda: mod.segment_sweep(*sa), number=1, repeat=repeat)),
    }


def end_to_end(pure: bool, repeat: int) -> float:
    env = {**os.environ, "SWAN_PURE_PYTHON": "1" if pure else "0"}
    out = subprocess.run([sys.executable, "-c", END_TO_END.format(repeat=repeat)], env=env,
                         capture_output=True, text=True, check=True)
    return float(out.stdout)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    rows = [(k, v, None) for k, v in bench(py, args.repeat).items()]
    if cy is not None:
        fast = bench(cy, args.repeat)
        rows = [(k, v, fast[k]) for k, v, _ in rows]
        rows.append(("dl_place SA dense (20 segs)", end_to_end(True, args.repeat), end_to_end(False, args.repeat)))
    print(f"{'kernel':<30}{'python [ms]':>14}{'compiled [ms]':>16}{'speedup':>10}")
    for name, slow, fast in rows:
        if fast is None:
            print(f"{name:<30}{slow * 1e3:>14.3f}{'n/a':>16}{'':>10}")
        else:
            print(f"{name:<30}{slow * 1e3:>14.3f}{fast * 1e3:>16.3f}{slow / fast:>9.1f}x")


if __name__ == "__main__":
    main()
