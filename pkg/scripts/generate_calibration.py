#!/usr/bin/env python3
"""Regenerate the shipped classifier calibration config.

Runs the anchor-model battery (a couple of minutes at N = 987 and 2584) and
writes src/quasidual/data/calibration.json.  Rerun after any change to the
assembly conventions, clustering rule or classifier form.
"""

import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from quasidual.calibration import calibrate, config_to_json   # noqa: E402


def main() -> None:
    cfg = calibrate()
    target = pathlib.Path(__file__).resolve().parents[1] / "src" / "quasidual" / "data" / "calibration.json"
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(config_to_json(cfg) + "\n")
    print(f"wrote {target}")
    print(f"c_loc={cfg.c_loc} c_ext={cfg.c_ext} drift_bound={cfg.drift_bound}")
    print(f"feasible c_loc interval: {cfg.anchors['c_loc_interval']}")
    print(f"feasible c_ext interval: {cfg.anchors['c_ext_interval']}")
    print(f"LE agreement at chosen c_loc: {cfg.anchors['le_agreement']}")


if __name__ == "__main__":
    main()
