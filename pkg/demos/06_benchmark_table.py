"""
Producing a result table
========================

The benchmark harness runs every agent on every environment for several
seeds and writes one CSV row per pair.  This is the library call behind
``extrl run``.
"""

import tempfile
from pathlib import Path

from extrl.bench import BenchConfig, run_benchmark, write_result_table

config = BenchConfig(
    agents=["constant_never_push", "constant_always_push", "random", "q", "rc(q)"],
    envs=["tempting_button", "self_recognition"],
    steps=5000,
    seeds=3,
)
rows = run_benchmark(config)

out = Path(tempfile.mkdtemp()) / "result_table.csv"
write_result_table(rows, out)
print(out.read_text())
