"""Built-in benchmark models paired with objective automata.

Each entry bundles a model (PRISM subset or explicit format), an omega
automaton in HOA format, and where expressible a matching LTL formula used
for cross-checking.  Models with a ``const double p`` accept an override.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from .automata import Automaton
from .hoa import parse_hoa
from .model import Mdp, parse_explicit
from .prism import parse_prism

TWO_PAIRS_MODEL = """\
mdp

const double p = 0.5;

module grid
  r : [0..1] init 0;
  c : [0..1] init 0;

  // go flips the row with probability p, else the column; from the bad
  // cell (1,1) it does nothing.
  [go] !(r=1 & c=1) -> p:(r'=1-r) + 1-p:(c'=1-c);
  [go] r=1 & c=1 -> true;
  [rest] true -> true;
endmodule

label "g0" = r=1 & c=0;
label "g1" = r=0 & c=1;
label "b" = r=1 & c=1;
"""

TWO_PAIRS_DRW = """\
HOA: v1
States: 2
Start: 0
AP: 3 "g0" "g1" "b"
acc-name: Rabin 2
Acceptance: 4 (Fin(0) & Inf(1)) | (Fin(2) & Inf(3))
--BODY--
State: 0 "safe"
[!2 & !0 & !1] 0 {0 2}
[!2 & !0 & 1] 0 {0 3}
[!2 & 0 & !1] 0 {1 2}
[!2 & 0 & 1] 0 {1 3}
[2] 1
State: 1 "trap"
[t] 1
--END--
"""

TWO_PAIRS_LDBW = """\
HOA: v1
States: 4
Start: 0
AP: 3 "g0" "g1" "b"
acc-name: Buchi
Acceptance: 1 Inf(0)
--BODY--
State: 0
[!2] 0
[0 & !2] 1
[1 & !2] 2
[2] 3
State: 1
[0 & !2] 1 {0}
[!0 | 2] 3
State: 2
[1 & !2] 2 {0}
[!1 | 2] 3
State: 3
[t] 3
--END--
"""

RISK_REWARD_MODEL = """\
mdp

const double p = 0.75;

module cells
  x : [0..3] init 0;

  [a] x=0 -> (x'=3);
  [b] x=0 -> p:(x'=2) + 1-p:(x'=1);
  [d] x=1 -> true;
  [e] x=2 -> true;
  [f] x=2 -> (x'=0);
  [c] x=3 -> (x'=0);
endmodule

label "g" = x=2 | x=3;
label "b" = x=1;
"""

RISK_REWARD_DBW = """\
HOA: v1
States: 2
Start: 0
AP: 2 "g" "b"
acc-name: Buchi
Acceptance: 1 Inf(0)
--BODY--
State: 0 "safe"
[0 & !1] 0 {0}
[!0 & !1] 0
[1] 1
State: 1 "trap"
[t] 1
--END--
"""

GFX_DBW = """\
HOA: v1
States: 1
Start: 0
AP: 1 "{ap}"
acc-name: Buchi
Acceptance: 1 Inf(0)
--BODY--
State: 0
[0] 0 {{0}}
[!0] 0
--END--
"""

REACH_DBW = """\
HOA: v1
States: 2
Start: 0
AP: 1 "{ap}"
acc-name: Buchi
Acceptance: 1 Inf(0)
--BODY--
State: 0
[0] 1
[!0] 0
State: 1
[t] 1 {{0}}
--END--
"""

REACH_AVOID_DBW = """\
HOA: v1
States: 3
Start: 0
AP: 2 "goal" "hole"
acc-name: Buchi
Acceptance: 1 Inf(0)
--BODY--
State: 0
[0] 1
[!0 & !1] 0
[!0 & 1] 2
State: 1 "acc"
[t] 1 {0}
State: 2 "dead"
[t] 2
--END--
"""

KNUTH_YAO_MODEL = """\
mdp

module die
  s : [0..7] init 0;
  d : [0..6] init 0;

  [flip] s=0 -> 0.5:(s'=1) + 0.5:(s'=2);
  [flip] s=1 -> 0.5:(s'=3) + 0.5:(s'=4);
  [flip] s=2 -> 0.5:(s'=5) + 0.5:(s'=6);
  [flip] s=3 -> 0.5:(s'=1) + 0.5:(s'=7)&(d'=1);
  [flip] s=4 -> 0.5:(s'=7)&(d'=2) + 0.5:(s'=7)&(d'=3);
  [flip] s=5 -> 0.5:(s'=7)&(d'=4) + 0.5:(s'=7)&(d'=5);
  [flip] s=6 -> 0.5:(s'=2) + 0.5:(s'=7)&(d'=6);
  [done] s=7 -> true;
endmodule

label "rolled" = s=7;
label "six" = s=7 & d=6;
"""


def _deferred_model_text() -> str:
    """Two-armed choice: a pays 19 early accepting steps, b one late recurrent one."""
    lines = ["states 41", "init 0"]
    for i in range(1, 20):
        lines.append(f"state {i} label acc")
    lines.append("state 40 label acc")
    lines.append("trans 0 a 1 1")
    lines.append("trans 0 b 1 21")
    for i in range(1, 20):
        lines.append(f"trans {i} step 1 {i + 1}")
    lines.append("trans 20 step 1 20")
    for i in range(21, 40):
        lines.append(f"trans {i} step 1 {i + 1}")
    lines.append("trans 40 step 1 40")
    return "\n".join(lines) + "\n"


FROZEN_SMALL_MAP = [
    "SFFF",
    "FHFH",
    "FFFH",
    "HFFG",
]

FROZEN_LARGE_MAP = [
    "SFFFFFFF",
    "FFFFFFFF",
    "FFFHFFFF",
    "FFFFFHFF",
    "FFFHFFFF",
    "FHHFFFHF",
    "FHFFHFHF",
    "FFFHFFFG",
]


def _frozen_model_text(grid: List[str]) -> str:
    """Slippery gridworld: intended direction and both perpendiculars, 1/3 each."""
    rows, cols = len(grid), len(grid[0])

    def idx(r: int, c: int) -> int:
        return r * cols + c

    moves = {
        "left": (0, -1),
        "down": (1, 0),
        "right": (0, 1),
        "up": (-1, 0),
    }
    order = ["left", "down", "right", "up"]
    lines = [f"states {rows * cols}", "init 0"]
    for r in range(rows):
        for c in range(cols):
            cell = grid[r][c]
            if cell == "H":
                lines.append(f"state {idx(r, c)} label hole")
            elif cell == "G":
                lines.append(f"state {idx(r, c)} label goal")
    third = "0.3333333333333333"
    for r in range(rows):
        for c in range(cols):
            s = idx(r, c)
            cell = grid[r][c]
            if cell in "HG":
                lines.append(f"trans {s} stay 1 {s}")
                continue
            for k, name in enumerate(order):
                outcomes: Dict[int, int] = {}
                for slip in (order[(k - 1) % 4], name, order[(k + 1) % 4]):
                    dr, dc = moves[slip]
                    r2 = min(max(r + dr, 0), rows - 1)
                    c2 = min(max(c + dc, 0), cols - 1)
                    d = idx(r2, c2)
                    outcomes[d] = outcomes.get(d, 0) + 1
                for d, count in sorted(outcomes.items()):
                    if count == 3:
                        lines.append(f"trans {s} {name} 1 {d}")
                    elif count == 2:
                        lines.append(f"trans {s} {name} 0.6666666666666667 {d}")
                    else:
                        lines.append(f"trans {s} {name} {third} {d}")
    return "\n".join(lines) + "\n"


def _windy_model_text() -> str:
    """Deterministic gridworld with an upward wind per column."""
    rows, cols = 7, 10
    wind = [0, 0, 0, 1, 1, 1, 2, 2, 1, 0]
    start = (3, 0)
    goal = (3, 7)

    def idx(r: int, c: int) -> int:
        return r * cols + c

    moves = {"left": (0, -1), "down": (1, 0), "right": (0, 1), "up": (-1, 0)}
    lines = [f"states {rows * cols}", f"init {idx(*start)}"]
    lines.append(f"state {idx(*goal)} label goal")
    for r in range(rows):
        for c in range(cols):
            s = idx(r, c)
            if (r, c) == goal:
                lines.append(f"trans {s} stay 1 {s}")
                continue
            for name, (dr, dc) in moves.items():
                r2 = min(max(r + dr - wind[c], 0), rows - 1)
                c2 = min(max(c + dc, 0), cols - 1)
                lines.append(f"trans {s} {name} 1 {idx(r2, c2)}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    description: str
    model_fmt: str
    model_text: str
    automaton_text: str
    formula: Optional[str] = None
    parametric: bool = False


@dataclass
class LoadedCorpus:
    entry: CorpusEntry
    mdp: Mdp
    automaton: Automaton


_ENTRIES: List[CorpusEntry] = [
    CorpusEntry(
        name="twoPairs",
        description="2x2 grid with two settle-able cells and a bad cell; "
        "objective (FG g0 | FG g1) & G !b as a two-pair Rabin automaton",
        model_fmt="prism",
        model_text=TWO_PAIRS_MODEL,
        automaton_text=TWO_PAIRS_DRW,
        formula="(F G g0 | F G g1) & G !b",
        parametric=True,
    ),
    CorpusEntry(
        name="twoPairsLDBW",
        description="twoPairs model with the same objective as a "
        "limit-deterministic Buchi automaton",
        model_fmt="prism",
        model_text=TWO_PAIRS_MODEL,
        automaton_text=TWO_PAIRS_LDBW,
        formula="(F G g0 | F G g1) & G !b",
        parametric=True,
    ),
    CorpusEntry(
        name="riskReward",
        description="four-cell loop where a safe cycle competes with a "
        "risky high-frequency cycle; objective G F g & G !b",
        model_fmt="prism",
        model_text=RISK_REWARD_MODEL,
        automaton_text=RISK_REWARD_DBW,
        formula="G F g & G !b",
        parametric=True,
    ),
    CorpusEntry(
        name="deferred",
        description="two chains trading 19 early accepting steps against "
        "one recurrent accepting loop; objective G F acc",
        model_fmt="explicit",
        model_text=_deferred_model_text(),
        automaton_text=GFX_DBW.format(ap="acc"),
        formula="G F acc",
    ),
    CorpusEntry(
        name="frozenSmall",
        description="4x4 slippery gridworld; reach the goal without "
        "falling into a hole",
        model_fmt="explicit",
        model_text=_frozen_model_text(FROZEN_SMALL_MAP),
        automaton_text=REACH_AVOID_DBW,
        formula="!hole U goal",
    ),
    CorpusEntry(
        name="frozenLarge",
        description="8x8 slippery gridworld; reach the goal without "
        "falling into a hole",
        model_fmt="explicit",
        model_text=_frozen_model_text(FROZEN_LARGE_MAP),
        automaton_text=REACH_AVOID_DBW,
        formula="!hole U goal",
    ),
    CorpusEntry(
        name="windy",
        description="7x10 gridworld with column-wise upward wind; "
        "reach the goal",
        model_fmt="explicit",
        model_text=_windy_model_text(),
        automaton_text=REACH_DBW.format(ap="goal"),
        formula="F goal",
    ),
    CorpusEntry(
        name="knuthYao",
        description="simulating a fair die by coin flips; "
        "objective F six",
        model_fmt="prism",
        model_text=KNUTH_YAO_MODEL,
        automaton_text=REACH_DBW.format(ap="six"),
        formula="F six",
    ),
]

_BY_NAME = {e.name: e for e in _ENTRIES}


def corpus_names() -> List[str]:
    return [e.name for e in _ENTRIES]


def corpus_entry(name: str) -> CorpusEntry:
    if name not in _BY_NAME:
        raise KeyError(f"unknown corpus model {name!r}; known: {', '.join(corpus_names())}")
    return _BY_NAME[name]


def load(name: str, p: Optional[float] = None) -> LoadedCorpus:
    entry = corpus_entry(name)
    if p is not None and not entry.parametric:
        raise ValueError(f"corpus model {name!r} has no parameter p")
    if entry.model_fmt == "prism":
        constants = {"p": p} if p is not None else None
        mdp = parse_prism(entry.model_text, constants=constants)
    else:
        mdp = parse_explicit(entry.model_text)
    automaton = parse_hoa(entry.automaton_text)
    return LoadedCorpus(entry, mdp, automaton)
