#!/usr/bin/env python3
# Regenerates decompose_golden.jsonl from the built CLI: python3 make_decompose_golden.py path/to/dsqft
import json
import math
import random
import subprocess
import sys

cli = sys.argv[1]
rng = random.Random(7)
lines = []
for i in range(24):
    a, b = rng.uniform(0, 2 * math.pi), rng.uniform(0, 2 * math.pi)
    t = rng.uniform(0, 2.5) if i else 0.0
    out = subprocess.run([cli, "decompose", "--factors", f"cartan:{a!r},{t!r},{b!r}"], capture_output=True, text=True)
    if out.returncode != 0:
        continue  # exceptional set; covered separately
    rec = json.loads(out.stdout)
    # re-decompose from the printed matrix so the stored record is a fixed point of the file round trip
    with open("/tmp/golden_one.json", "w") as f:
        json.dump({"matrix": rec["matrix"]}, f)
    out = subprocess.run([cli, "decompose", "--file", "/tmp/golden_one.json"], capture_output=True, text=True, check=True)
    lines.append(out.stdout.strip())
with open(sys.argv[2] if len(sys.argv) > 2 else "decompose_golden.jsonl", "w") as f:
    f.write("\n".join(lines) + "\n")
