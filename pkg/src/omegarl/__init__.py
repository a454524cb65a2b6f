"""Tools for learning and verifying omega-regular objectives on MDPs.

The package covers the full pipeline: parsing Markov decision processes
(a native explicit format and a restricted PRISM subset), omega-automata
with Buchi or Rabin transition-based acceptance (HOA exchange format,
limit-determinization, classification), the synchronous product and its
reachability-shaped augmentation, exact analysis (end components, optimal
reachability and satisfaction probabilities, strategy evaluation, average
reward), and model-free Q-learning against the augmented product.
"""

from .model import (
    Diagnostic,
    Mdp,
    ModelFormatError,
    parse_explicit,
    parse_model,
    serialize_explicit,
)
from .prism import PrismSyntaxError, parse_prism
from .automata import (
    Automaton,
    AutomatonError,
    Edge,
    Ldbw,
    classify,
    is_deterministic,
    lasso_accepts,
    ldbw_partition,
    nbw_to_ldbw,
)
from .hoa import HoaError, parse_hoa, print_hoa
from .ltl import LtlSyntaxError, eval_ltl_lasso, parse_ltl

__version__ = "0.1.0"

__all__ = [
    "Diagnostic",
    "Mdp",
    "ModelFormatError",
    "parse_explicit",
    "parse_model",
    "serialize_explicit",
    "PrismSyntaxError",
    "parse_prism",
    "Automaton",
    "AutomatonError",
    "Edge",
    "Ldbw",
    "classify",
    "is_deterministic",
    "lasso_accepts",
    "ldbw_partition",
    "nbw_to_ldbw",
    "HoaError",
    "parse_hoa",
    "print_hoa",
    "LtlSyntaxError",
    "eval_ltl_lasso",
    "parse_ltl",
    "__version__",
]
