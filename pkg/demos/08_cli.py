"""
Driving campaigns from the command line
=======================================
"""

# %%
import json
import tempfile
from pathlib import Path

from skewfuzz.cli import main
from skewfuzz.config import shipped

out = Path(tempfile.mkdtemp())
code = main(["fuzz", "--config", str(shipped("wordcount")), "--output", str(out / "wc")])
print("exit", code)
print(json.loads((out / "wc" / "result.json").read_text()))

# %%
main(["gen", "deptgpas", "--output", str(out / "grades"), "--param", "n_partitions=4"])
main(["run", "--config", str(shipped("deptgpas")), "--input-dir", str(out / "grades"), "--output", str(out / "run")])
