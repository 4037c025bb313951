"""Random small layered MDPs and a brute-force policy-enumeration oracle."""
import itertools
import math
from fractions import Fraction

from mosaic.mdp import AbstractMdp


def random_layered_mdp(rng, k, max_width=5, max_choices=3, max_policies=20000):
    while True:
        mdp = AbstractMdp()
        layers = []
        for d in range(k + 1):
            width = int(rng.integers(1, max_width + 1))
            layer = []
            for _ in range(width):
                fail = d > 0 and rng.random() < 0.3
                layer.append(mdp.add_state(None, fail, d))
            layers.append(layer)
        for sid in layers[0]:
            mdp.mark_initial(sid)
        n_pol = 1
        for d in range(k):
            for sid in layers[d]:
                if mdp.states[sid].fail:
                    continue
                for _ in range(int(rng.integers(1, max_choices + 1))):
                    succ = rng.choice(layers[d + 1], size=int(rng.integers(1, 4)), replace=True)
                    cuts = sorted(rng.integers(1, 8, size=len(succ) - 1))
                    parts = [b - a for a, b in zip([0] + cuts, cuts + [8])]
                    dist = [(p / 8, int(t)) for p, t in zip(parts, succ) if p > 0]
                    mdp.add_choice(sid, dist)
                n_pol *= len(mdp.choices[sid])
        if n_pol <= max_policies:
            return mdp.freeze()


def brute_force_max(mdp, k):
    """Max over all memoryless deterministic policies, exact rationals."""
    states = [s for s in range(len(mdp.states)) if mdp.choices[s]]
    best = {s: Fraction(0) for s in range(len(mdp.states))}
    for pick in itertools.product(*[range(len(mdp.choices[s])) for s in states]):
        policy = dict(zip(states, pick))
        memo = {}

        def val(s):
            if s in memo:
                return memo[s]
            st = mdp.states[s]
            if st.fail:
                v = Fraction(1)
            elif st.depth >= k or s not in policy:
                v = Fraction(0)
            else:
                v = sum((Fraction(p) * val(t) for p, t in mdp.choices[s][policy[s]].distribution),
                        Fraction(0))
            memo[s] = v
            return v

        for s in range(len(mdp.states)):
            if mdp.states[s].depth <= k:
                best[s] = max(best[s], val(s))
    return {s: float(v) for s, v in best.items() if mdp.states[s].depth <= k}


def read_tra_max(stem, k):
    """Bounded max reachability straight from exported .tra/.lab text."""
    tra = open(str(stem) + ".tra").read().split("\n")
    n = int(tra[0].split()[0])
    choices = {}
    for line in tra[1:]:
        if line.strip():
            s, j, t, p = line.split()
            choices.setdefault(int(s), {}).setdefault(int(j), []).append((float(p), int(t)))
    fail = set()
    for line in open(str(stem) + ".lab").read().split("\n")[1:]:
        if line.strip():
            sid, labels = line.split(":")
            if "1" in labels.split():
                fail.add(int(sid))
    value = [1.0 if s in fail else 0.0 for s in range(n)]
    for _ in range(k):
        value = [1.0 if s in fail else
                 max(math.fsum(p * value[t] for p, t in d) for d in choices[s].values())
                 for s in range(n)]
    return value
