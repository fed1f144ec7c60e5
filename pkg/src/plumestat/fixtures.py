"""Seeded synthetic example datasets.

Two sites ship with the repo: "basic" (8 wells, 3 solutes + groundwater
levels, 12 quarterly events) and "comprehensive" (25 wells, 5 solutes +
GW + NAPL, 24 quarterly events).  Generation is fully deterministic so
expected outputs can be frozen in tests; regenerate with
``python -m plumestat.fixtures <outdir>``.
"""

from __future__ import annotations

import io
import json
import math
from datetime import date, timedelta
from pathlib import Path

import numpy as np

BASIC_SEED = 20180104
COMPREHENSIVE_SEED = 20140217

_BASIC_SOLUTES = [
    # name, units, detection limit, source strength (log mg/l at t0)
    ("Benzene", "mg/l", 0.02, 2.2),
    ("Toluene", "mg/l", 0.05, 1.4),
    ("MTBE", "mg/l", 0.05, 0.6),
]

_COMP_SOLUTES = [
    ("Benzene", "ug/l", 1.0, 7.6),
    ("Toluene", "ug/l", 1.0, 6.8),
    ("Ethylbenzene", "ug/l", 0.5, 5.9),
    ("Xylene", "ug/l", 2.0, 6.3),
    ("MTBE", "ug/l", 0.5, 5.1),
]


def _quarterly_dates(start, events, rng):
    """One sampling date per quarter, jittered inside the quarter."""
    out = []
    d = start
    for _ in range(events):
        out.append(d + timedelta(days=int(rng.integers(5, 75))))
        month = d.month + 3
        d = date(d.year + (month - 1) // 12, (month - 1) % 12 + 1, 1)
    return out


def _plume_log_conc(x, y, t_frac, src, strength, decay, spread):
    """Gaussian plume in log-concentration, decaying and drifting in time."""
    cx = src[0] + 40.0 * t_frac  # slow down-gradient drift
    cy = src[1] + 12.0 * t_frac
    d2 = ((x - cx) ** 2 + (y - cy) ** 2) / spread**2
    return strength - decay * t_frac - 2.2 * d2


def _well_grid(n, extent, rng):
    """Roughly gridded well field with jitter."""
    side = math.ceil(math.sqrt(n))
    xs, ys = [], []
    for i in range(n):
        gx, gy = i % side, i // side
        xs.append((gx + 0.5) / side * extent + rng.uniform(-0.06, 0.06) * extent)
        ys.append((gy + 0.5) / side * extent + rng.uniform(-0.06, 0.06) * extent)
    return np.array(xs), np.array(ys)


def _format(v, decimals=4):
    return f"{round(float(v), decimals):g}"


def _build_site(seed, n_wells, events, start, solutes, extent, gw_base,
                napl_wells=(), well_prefix="MW"):
    rng = np.random.default_rng(seed)
    xs, ys = _well_grid(n_wells, extent, rng)
    well_ids = [f"{well_prefix}-{i + 1:02d}" for i in range(n_wells)]
    dates = _quarterly_dates(start, events, rng)
    src = (0.3 * extent, 0.45 * extent)

    monitoring = io.StringIO()
    monitoring.write("WellID,SampleDate,Constituent,Result,Units\n")

    for k, d in enumerate(dates):
        t_frac = k / max(events - 1, 1)
        for i, wid in enumerate(well_ids):
            # groundwater elevation: regional gradient + seasonal swing
            gw = (
                gw_base
                - 0.004 * xs[i]
                - 0.0015 * ys[i]
                + 0.35 * math.sin(2 * math.pi * (k % 4) / 4.0)
                + rng.normal(0, 0.03)
            )
            monitoring.write(f"{wid},{d.isoformat()},GW,{_format(gw, 3)},m\n")

            in_napl = wid in napl_wells and k >= events // 3
            if in_napl:
                thick = 0.08 + 0.3 * t_frac + rng.normal(0, 0.01)
                monitoring.write(
                    f"{wid},{d.isoformat()},NAPL,{_format(max(thick, 0.01), 3)},m\n"
                )

            for name, units, dl, strength in solutes:
                if in_napl:
                    continue  # free product prevents solute analysis
                mu = _plume_log_conc(
                    xs[i], ys[i], t_frac, src, strength,
                    decay=1.6, spread=0.38 * extent,
                )
                conc = math.exp(mu + rng.normal(0, 0.35))
                if conc < dl:
                    monitoring.write(f"{wid},{d.isoformat()},{name},ND<{_format(dl)},{units}\n")
                else:
                    monitoring.write(
                        f"{wid},{d.isoformat()},{name},{_format(conc)},{units}\n"
                    )

    wells = io.StringIO()
    wells.write("WellID,X,Y\n")
    for wid, x, y in zip(well_ids, xs, ys):
        wells.write(f"{wid},{_format(x, 2)},{_format(y, 2)}\n")

    overlays = {
        "type": "FeatureCollection",
        "features": [
            {
                "type": "Feature",
                "properties": {"name": "site boundary"},
                "geometry": {
                    "type": "LineString",
                    "coordinates": [
                        [0.02 * extent, 0.02 * extent],
                        [0.98 * extent, 0.02 * extent],
                        [0.98 * extent, 0.98 * extent],
                        [0.02 * extent, 0.98 * extent],
                        [0.02 * extent, 0.02 * extent],
                    ],
                },
            },
            {
                "type": "Feature",
                "properties": {"name": "access road"},
                "geometry": {
                    "type": "LineString",
                    "coordinates": [
                        [0.1 * extent, 0.9 * extent],
                        [0.55 * extent, 0.6 * extent],
                        [0.95 * extent, 0.55 * extent],
                    ],
                },
            },
        ],
    }
    return monitoring.getvalue(), wells.getvalue(), json.dumps(overlays, indent=1)


def make_basic():
    """8 wells, 3 solutes + GW, 12 quarterly events."""
    return _build_site(
        seed=BASIC_SEED,
        n_wells=8,
        events=12,
        start=date(2018, 1, 1),
        solutes=_BASIC_SOLUTES,
        extent=250.0,
        gw_base=31.5,
    )


def make_comprehensive():
    """25 wells, 5 solutes + GW + NAPL, 24 quarterly events."""
    return _build_site(
        seed=COMPREHENSIVE_SEED,
        n_wells=25,
        events=24,
        start=date(2014, 1, 1),
        solutes=_COMP_SOLUTES,
        extent=600.0,
        gw_base=58.0,
        napl_wells=("MW-07", "MW-13"),
    )


def write_fixture(name, outdir):
    """Write one fixture's CSV/JSON files into ``outdir``."""
    maker = {"basic": make_basic, "comprehensive": make_comprehensive}[name]
    monitoring, wells, overlays = maker()
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "monitoring.csv").write_text(monitoring, encoding="utf-8")
    (outdir / "wells.csv").write_text(wells, encoding="utf-8")
    (outdir / "overlays.json").write_text(overlays, encoding="utf-8")
    return outdir


def main(argv=None):
    import argparse

    parser = argparse.ArgumentParser(description="regenerate the example datasets")
    parser.add_argument("outdir", help="directory receiving basic/ and comprehensive/")
    args = parser.parse_args(argv)
    for name in ("basic", "comprehensive"):
        path = write_fixture(name, Path(args.outdir) / name)
        print(f"wrote {name} fixture to {path}")


if __name__ == "__main__":
    main()
