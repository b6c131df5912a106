import sys
from pathlib import Path

from hypothesis import settings

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")
