"""Bundled model corpus.

Five canonical models ship as ``.blog`` files under ``oupl/models/``; the
generators here produce those files plus parameterized variants (urn-ball
with different ball/draw counts, mixtures with different datasets) used by
the benchmark suite.

The burglary and hurricane parameter tables live in the model sources
themselves; they are conventional textbook shapes with probabilities kept
moderate so MCMC chains mix fast enough for tight testing tolerances.
"""

from __future__ import annotations

import random
from pathlib import Path

MODELS_DIR = Path(__file__).parent / "models"

BURGLARY = """\
// Burglary / earthquake alarm network with two call reports.
// All dependencies are fixed (no contingency): the demand-driven sampler
// touches exactly the same variables as eager sampling, and children sets
// never change during MH.
random Bool burglary ~ Bernoulli(0.3);
random Bool earthquake ~ Bernoulli(0.2);
random Bool alarm ~
    if burglary then (if earthquake then Bernoulli(0.95) else Bernoulli(0.9))
    else (if earthquake then Bernoulli(0.45) else Bernoulli(0.1));
random Bool john_calls ~ if alarm then Bernoulli(0.8) else Bernoulli(0.15);
random Bool mary_calls ~ if alarm then Bernoulli(0.75) else Bernoulli(0.1);
obs john_calls = true;
obs mary_calls = true;
query burglary;
"""

HURRICANE = """\
// Two-city hurricane model: the city hit first prepares blind, the other
// city adjusts its preparation level to the damage observed in the first.
// The template graph is cyclic (prep depends on damage, damage on prep)
// but every concrete world is acyclic.
type City;
distinct City A, B;
type PrepLevel;
distinct PrepLevel Low, High;
type DamageLevel;
distinct DamageLevel Severe, Mild;
random City first ~ UniformChoice({City c});
random PrepLevel prep(City c) ~
    if first == c then Categorical({Low -> 0.5, High -> 0.5})
    else case damage(first) in {Severe -> Categorical({Low -> 0.2, High -> 0.8}),
                                Mild   -> Categorical({Low -> 0.8, High -> 0.2})};
random DamageLevel damage(City c) ~
    case prep(c) in {Low  -> Categorical({Severe -> 0.8, Mild -> 0.2}),
                     High -> Categorical({Severe -> 0.2, Mild -> 0.8})};
obs first = A;
obs damage(A) = Severe;
query prep(B);
"""


def urn_ball(max_balls: int = 20, n_obs_draws: int = 2) -> str:
    """Urn-ball model: an urn with an unknown number of balls, draws with
    replacement, ball colors observed for the first ``n_obs_draws`` draws,
    query on the color of one more draw."""
    lines = [
        "// Urn with an unknown number of balls; draws are with replacement.",
        f"// At most {max_balls} balls, {n_obs_draws} observed draws.",
        "type Ball;",
        "type Draw;",
        "type Color;",
        "distinct Color Blue, Green;",
    ]
    draw_names = [f"D{i + 1}" for i in range(n_obs_draws)] + ["DNext"]
    lines.append(f"distinct Draw {', '.join(draw_names)};")
    lines.append(f"#Ball ~ UniformInt(1, {max_balls});")
    lines.append("random Color color(Ball b) ~ Categorical({Blue -> 0.9, Green -> 0.1});")
    lines.append("random Ball drawn(Draw d) ~ UniformChoice({Ball b});")
    for i in range(n_obs_draws):
        color = "Green" if i % 3 == 2 else "Blue"
        lines.append(f"obs color(drawn(D{i + 1})) = {color};")
    lines.append("query color(drawn(DNext));")
    return "\n".join(lines) + "\n"


def _mixture_data(n_points: int, means, sd: float = 1.0, seed: int = 20240601):
    rng = random.Random(seed)
    data = []
    for i in range(n_points):
        m = means[i % len(means)]
        data.append(round(rng.gauss(m, sd), 4))
    return data


def gmm(n_clusters: int = 4, n_points: int = 100) -> str:
    """Closed-universe 1-d Gaussian mixture: known cluster count, cluster
    means latent with a wide Gaussian prior, unit observation variance.
    Cluster centers are well separated so chains keep a stable labeling."""
    means = [-9.0, -3.0, 3.0, 9.0, 15.0, -15.0][:n_clusters]
    data = _mixture_data(n_points, means)
    lines = [
        f"// 1-d Gaussian mixture: {n_clusters} clusters, {n_points} points.",
        "type Cluster;",
        "type Data;",
        f"distinct Cluster {', '.join('C%d' % (i + 1) for i in range(n_clusters))};",
        f"distinct Data {', '.join('P%d' % i for i in range(n_points))};",
        "random Real mu(Cluster c) ~ Gaussian(0.0, 25.0);",
        "random Cluster z(Data d) ~ UniformChoice({Cluster c});",
        "random Real x(Data d) ~ Gaussian(mu(z(d)), 1.0);",
    ]
    for i, v in enumerate(data):
        lines.append(f"obs x(P{i}) = {v};")
    for i in range(n_clusters):
        lines.append(f"query mu(C{i + 1});")
    return "\n".join(lines) + "\n"


def gmm_inf(n_points: int = 6) -> str:
    """Open-universe Gaussian mixture: the number of clusters is itself a
    Poisson-distributed latent."""
    data = _mixture_data(n_points, [0.5, 5.8, -4.9], sd=0.7, seed=20240602)
    lines = [
        f"// Gaussian mixture with an unknown number of clusters; {n_points} points.",
        "type Cluster;",
        "type Data;",
        f"distinct Data {', '.join('P%d' % i for i in range(n_points))};",
        "#Cluster ~ Poisson(4);",
        "random Real mu(Cluster c) ~ Gaussian(0.0, 25.0);",
        "random Cluster z(Data d) ~ UniformChoice({Cluster c});",
        "random Real x(Data d) ~ Gaussian(mu(z(d)), 1.0);",
    ]
    for i, v in enumerate(data):
        lines.append(f"obs x(P{i}) = {v};")
    lines.append("query #Cluster;")
    return "\n".join(lines) + "\n"


CANONICAL = {
    "burglary": lambda: BURGLARY,
    "hurricane": lambda: HURRICANE,
    "urn_ball": lambda: urn_ball(20, 2),
    "gmm": lambda: gmm(4, 100),
    "gmm_inf": lambda: gmm_inf(6),
}


def model_source(name: str) -> str:
    """Source text of a bundled model, or a parameterized variant.

    Variant names: ``urn_ball_<balls>_<draws>`` (e.g. ``urn_ball_40_20``).
    """
    if name in CANONICAL:
        path = MODELS_DIR / f"{name}.blog"
        if path.exists():
            return path.read_text()
        return CANONICAL[name]()
    if name.startswith("urn_ball_"):
        parts = name.split("_")
        return urn_ball(int(parts[2]), int(parts[3]))
    raise KeyError(f"unknown model {name!r}")


def model_path(name: str) -> Path:
    return MODELS_DIR / f"{name}.blog"


def materialize(out_dir: Path = None) -> list:
    """Write the five canonical model files; returns the paths."""
    out_dir = Path(out_dir) if out_dir else MODELS_DIR
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, gen in CANONICAL.items():
        p = out_dir / f"{name}.blog"
        p.write_text(gen())
        paths.append(p)
    return paths
