"""
Narrow passage: exact shape versus enclosing disc
=================================================

Two static ellipses leave a gap that the triangle fits through but its
enclosing unit disc does not.  With the exact shape the robot drives straight
through.  With the disc model the barrier stops it at the entrance; the run
times out pressed against the walls and the final barrier values sit at the
rounding level, which the summary counts as contact.
"""

from safeguard import config
from safeguard.sim import run

doc = config.load(config.bundled_scenarios()["narrow_passage.json"])

for shape in ("se2", "circle"):
    scenario = config.build(doc, shape=shape)
    log = run(scenario)
    s = log.summary()
    last = log.rows[-1]
    print(
        f"{shape:>6}: goal={s['goal_reached']} t_goal={s['t_goal']} min_h={s['min_h']:.3g} "
        f"path={log.path_length(scenario.model):.2f} m, final position {last.state[:2].round(3)}"
    )
