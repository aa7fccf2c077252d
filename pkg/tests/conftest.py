import os
import sys

HERE = os.path.dirname(os.path.abspath(__file__))
if HERE not in sys.path:
    sys.path.insert(0, HERE)

# all experiment-backed tests share one cache next to the repository
os.environ.setdefault(
    "GAFZEROS_CACHE", os.path.join(os.path.dirname(HERE), ".cache", "experiments"))
