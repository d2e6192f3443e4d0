"""Turn solved routes into field artifacts: GeoJSON with real road geometry,
a standalone SVG per zone, and the dispatcher summary. Equivalent to running
the ``fleetroute matrix|solve|export`` pipeline.

Run:  python3 demos/03_render_maps.py
"""
from pathlib import Path
import sys

sys.path.insert(0, str(Path(__file__).parent))
from make_dataset import ensure_dataset

from fleetroute.cli import main as fleetroute

here = Path(__file__).parent
ensure_dataset()
config = here / "run.json"

# the same three stages a dispatcher would run from the shell
for command in ("matrix", "solve", "export"):
    print(f"\n$ fleetroute {command} --config {config.name}")
    code = fleetroute([command, "--config", str(config), *(
        ["--baseline-trips", "38"] if command == "export" else []
    )])
    assert code == 0, f"{command} failed with exit {code}"

out = here / "out"
print("\nartifacts:")
for p in sorted(out.iterdir()):
    print(f"  {p.relative_to(here)}  ({p.stat().st_size} bytes)")
print("\nopen out/master.geojson in any map viewer, or out/zone-*.svg directly.")
