"""Regenerate the JSON fixtures under scenarios/refine and scenarios/bridge.

Run from the repository root: ``python3 scenarios/make_fixtures.py``.
"""

import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

from curated import CURATED, base_space  # noqa: E402
from dataspace.harness import parse_scenario, run_scenario, snapshot  # noqa: E402
from dataspace.harness.snapshot import element_to_json  # noqa: E402
from dataspace.model import new_data_space  # noqa: E402

here = Path(__file__).resolve().parent

(here / "refine" / "abstract.json").write_text(snapshot(base_space()), encoding="utf-8")
for name, (element, children, patches, check, _) in CURATED.items():
    decs = [] if element is None else [{
        "element": element,
        "children": [element_to_json(c) for c in children],
        "patches": {k: v.to_json() for k, v in (patches or {}).items()},
        "check": check,
    }]
    doc = {"space": "abstract.json", "decompositions": decs}
    (here / "refine" / f"{name}.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")

sc = parse_scenario((here / "federation.scn").read_text(encoding="utf-8"))
state = run_scenario(sc).state
(here / "bridge" / "space_a.json").write_text(snapshot(state), encoding="utf-8")
peer = new_data_space(sc.peer_orgs, (), sc.peer_socials)
(here / "bridge" / "space_b.json").write_text(snapshot(peer), encoding="utf-8")
(here / "bridge" / "bridge.txt").write_text(
    "# space A hosts the data, space B hosts the peer organizations\n"
    "space_a space_a.json\nspace_b space_b.json\n"
    + "".join(f"recognize {a}@A {b}@B\n" for a, b in sc.recognitions),
    encoding="utf-8",
)
