#!/usr/bin/env python3
"""Smoke test for the opg_py extension module.

Builds are looked up in target/release first, then target/debug. Run
`cargo build -p opg-py` (or --release) before this script.
"""

import importlib.machinery
import importlib.util
import json
import sys
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent

SOURCE = """
opg C : (1,1) -> (1,0) {
  maxprio 4;
  node a E;
  node c E;
  node d A;
  node b A;
  in.r1 -> a @ 0;
  a -> c @ 1;
  c -> d @ 0;
  c -> out.r1 @ 0;
  d -> b @ 1;
  d -> out.r1 @ 2;
  b -> a @ 3;
  b -> out.l1 @ 0;
}
opg w : (1,0) -> (1,0) {
  in.r1 -> out.r1 @ 2;
}
diagram loopback = C ; w;
"""


def load_module():
    candidates = [
        REPO / "target" / "release" / "libopg_py.so",
        REPO / "target" / "debug" / "libopg_py.so",
    ]
    for path in candidates:
        if path.exists():
            loader = importlib.machinery.ExtensionFileLoader("opg_py", str(path))
            spec = importlib.util.spec_from_loader("opg_py", loader)
            module = importlib.util.module_from_spec(spec)
            loader.exec_module(module)
            return module
    sys.exit(f"no libopg_py.so under {REPO / 'target'}; run `cargo build -p opg-py`")


def main():
    opg = load_module()

    src = opg.Source(SOURCE)
    assert src.opgs() == ["C", "w"], src.opgs()
    assert src.diagrams() == ["loopback"], src.diagrams()
    print("parse: ok")

    reports = {
        mode: json.loads(src.solve("C", mode=mode))
        for mode in ("compositional", "monolithic", "oracle")
    }
    for mode, report in reports.items():
        assert report["mode"] == mode
        entrances = report["entrances"]
        assert len(entrances) == 1, entrances
        assert entrances[0]["id"] == "in.r1"
        assert entrances[0]["class"] == "pending"
        assert entrances[0]["front"] == [[{"exit": "out.r1", "priority": 1}]]
    print("solve: all three modes agree on the running example")

    composed = json.loads(src.solve("loopback", pruning=True, jobs=2))
    assert composed["entrances"][0]["class"] == "pending"
    assert composed["stats"]["queries"] > 0
    print("solve: composed diagram ok")

    dot = src.dot("C")
    assert dot.startswith('digraph "C"')
    assert dot.count("shape=diamond") == 2
    print("dot: ok")

    checks = src.validate()
    assert all(not violations for _, violations in checks), checks
    print("validate: ok")

    reparsed = opg.Source(src.render())
    assert reparsed.opgs() == src.opgs()
    assert json.loads(reparsed.solve("C")) == reports["compositional"]
    print("render roundtrip: ok")

    for m in range(0, 11):
        d = opg.dual_priority(m)
        assert opg.dual_priority(d) == m, (m, d)
        assert max(m, d) % 2 == 0, (m, d)
    assert opg.compare_subpriority(3, 0) == -1
    assert opg.compare_subpriority(0, 2) == -1
    assert opg.compare_subpriority(4, 4) == 0
    assert opg.compare_subpriority(1, 3) == 1
    print("priority order helpers: ok")

    try:
        opg.Source("opg broken {")
    except ValueError as e:
        assert "line" in str(e), e
        print("error reporting: ok")
    else:
        sys.exit("parse of a broken file should raise ValueError")

    try:
        src.solve("ghost")
    except ValueError:
        print("unknown name rejection: ok")
    else:
        sys.exit("solving an unknown name should raise ValueError")

    print("smoke test passed")


if __name__ == "__main__":
    main()
