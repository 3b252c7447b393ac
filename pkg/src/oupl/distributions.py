"""Distribution kernels: sampling, log-likelihood, conjugate posteriors.

These are shared by the reference interpreter and by generated inference
programs, so density values agree bit-for-bit between the two paths.

Counting convention: every ``sample_*`` call increments ``ctx.rng_calls``
exactly once, regardless of how many raw uniforms the draw consumes
internally.  Log-likelihood functions do not count anything themselves;
callers count one likelihood evaluation per per-variable conditional
density they compute.

Parameter conventions: Gaussian takes (mean, variance); Gamma takes
(shape, rate).  Off-support values yield ``-inf``; invalid parameters raise
ParamDomainError.
"""

from __future__ import annotations

import math

from .errors import ParamDomainError

NEG_INF = float("-inf")
LOG_2PI = math.log(2.0 * math.pi)


# ---------------------------------------------------------------------------
# Bernoulli

def sample_bernoulli(ctx, p):
    if not (0.0 <= p <= 1.0):
        raise ParamDomainError(f"Bernoulli probability {p!r} outside [0, 1]")
    ctx.rng_calls += 1
    return ctx.rng.random() < p


def logpdf_bernoulli(x, p):
    if not (0.0 <= p <= 1.0):
        raise ParamDomainError(f"Bernoulli probability {p!r} outside [0, 1]")
    if x is True:
        return math.log(p) if p > 0.0 else NEG_INF
    if x is False:
        return math.log1p(-p) if p < 1.0 else NEG_INF
    return NEG_INF


# ---------------------------------------------------------------------------
# Gaussian (mean, variance)

def sample_gaussian(ctx, mean, var):
    if not var > 0.0:
        raise ParamDomainError(f"Gaussian variance {var!r} must be positive")
    ctx.rng_calls += 1
    return ctx.rng.gauss(mean, math.sqrt(var))


def logpdf_gaussian(x, mean, var):
    if not var > 0.0:
        raise ParamDomainError(f"Gaussian variance {var!r} must be positive")
    d = x - mean
    return -0.5 * (LOG_2PI + math.log(var)) - 0.5 * d * d / var


# ---------------------------------------------------------------------------
# UniformInt (inclusive bounds)

def sample_uniform_int(ctx, lo, hi):
    if hi < lo:
        raise ParamDomainError(f"UniformInt bounds [{lo}, {hi}] are empty")
    ctx.rng_calls += 1
    return ctx.rng.randint(lo, hi)


def logpdf_uniform_int(x, lo, hi):
    if hi < lo:
        raise ParamDomainError(f"UniformInt bounds [{lo}, {hi}] are empty")
    if isinstance(x, int) and lo <= x <= hi:
        return -math.log(hi - lo + 1)
    return NEG_INF


# ---------------------------------------------------------------------------
# Poisson

def sample_poisson(ctx, rate):
    if not rate > 0.0:
        raise ParamDomainError(f"Poisson rate {rate!r} must be positive")
    ctx.rng_calls += 1
    # Inversion by sequential search; rates here are small.
    u = ctx.rng.random()
    p = math.exp(-rate)
    cum = p
    k = 0
    while u > cum:
        k += 1
        p *= rate / k
        cum += p
        if k > 100000:
            raise ParamDomainError(f"Poisson rate {rate!r} too large for inversion")
    return k


def logpdf_poisson(x, rate):
    if not rate > 0.0:
        raise ParamDomainError(f"Poisson rate {rate!r} must be positive")
    if isinstance(x, int) and x >= 0:
        return x * math.log(rate) - rate - math.lgamma(x + 1)
    return NEG_INF


# ---------------------------------------------------------------------------
# Beta

def sample_beta(ctx, a, b):
    if not (a > 0.0 and b > 0.0):
        raise ParamDomainError(f"Beta parameters ({a!r}, {b!r}) must be positive")
    ctx.rng_calls += 1
    return ctx.rng.betavariate(a, b)


def logpdf_beta(x, a, b):
    if not (a > 0.0 and b > 0.0):
        raise ParamDomainError(f"Beta parameters ({a!r}, {b!r}) must be positive")
    if not (0.0 < x < 1.0):
        return NEG_INF
    lbeta = math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)
    return (a - 1.0) * math.log(x) + (b - 1.0) * math.log1p(-x) - lbeta


# ---------------------------------------------------------------------------
# Gamma (shape, rate)

def sample_gamma(ctx, shape, rate):
    if not (shape > 0.0 and rate > 0.0):
        raise ParamDomainError(f"Gamma parameters ({shape!r}, {rate!r}) must be positive")
    ctx.rng_calls += 1
    return ctx.rng.gammavariate(shape, 1.0 / rate)


def logpdf_gamma(x, shape, rate):
    if not (shape > 0.0 and rate > 0.0):
        raise ParamDomainError(f"Gamma parameters ({shape!r}, {rate!r}) must be positive")
    if not x > 0.0:
        return NEG_INF
    return (shape * math.log(rate) + (shape - 1.0) * math.log(x)
            - rate * x - math.lgamma(shape))


# ---------------------------------------------------------------------------
# Categorical over explicit values

def sample_categorical(ctx, values, weights):
    total = 0.0
    for w in weights:
        if w < 0.0:
            raise ParamDomainError(f"negative Categorical weight {w!r}")
        total += w
    if not total > 0.0:
        raise ParamDomainError("Categorical weights sum to zero")
    ctx.rng_calls += 1
    u = ctx.rng.random() * total
    cum = 0.0
    for v, w in zip(values, weights):
        cum += w
        if u < cum:
            return v
    return values[-1]


def logpdf_categorical(x, values, weights):
    total = 0.0
    wx = None
    for v, w in zip(values, weights):
        if w < 0.0:
            raise ParamDomainError(f"negative Categorical weight {w!r}")
        total += w
        if wx is None and v == x and type(v) is type(x):
            wx = w
    if not total > 0.0:
        raise ParamDomainError("Categorical weights sum to zero")
    if wx is None or wx == 0.0:
        return NEG_INF
    return math.log(wx / total)


# ---------------------------------------------------------------------------
# UniformChoice over the first n objects of a type

def sample_uniform_choice(ctx, n):
    if n <= 0:
        raise ParamDomainError("UniformChoice over an empty object set")
    ctx.rng_calls += 1
    return ctx.rng.randrange(n)


def logpdf_uniform_choice(x, n):
    if n <= 0:
        raise ParamDomainError("UniformChoice over an empty object set")
    if isinstance(x, int) and 0 <= x < n:
        return -math.log(n)
    return NEG_INF


# ---------------------------------------------------------------------------
# Log-space categorical used by enumerated Gibbs

def sample_log_categorical(ctx, values, logweights):
    m = max(logweights)
    if m == NEG_INF:
        raise ParamDomainError("all enumerated outcomes have zero probability")
    ws = [math.exp(lw - m) for lw in logweights]
    return sample_categorical(ctx, values, ws)


# ---------------------------------------------------------------------------
# Conjugate posterior updates

def posterior_beta_bernoulli(a, b, successes, failures):
    """Beta(a, b) prior with Bernoulli children -> Beta(a+s, b+f)."""
    return a + successes, b + failures


def posterior_gamma_poisson(shape, rate, n, total):
    """Gamma(shape, rate) prior with n Poisson children summing to total
    -> Gamma(shape + total, rate + n)."""
    return shape + total, rate + n


def posterior_gaussian_mean(mu0, var0, n, obs_sum, like_var):
    """Gaussian(mu0, var0) prior on the mean of n Gaussian observations with
    known variance like_var -> Gaussian posterior (mean, variance)."""
    prec = 1.0 / var0 + n / like_var
    mean = (mu0 / var0 + obs_sum / like_var) / prec
    return mean, 1.0 / prec


def sample_posterior_beta_bernoulli(ctx, a, b, successes, failures):
    a2, b2 = posterior_beta_bernoulli(a, b, successes, failures)
    return sample_beta(ctx, a2, b2)


def sample_posterior_gamma_poisson(ctx, shape, rate, n, total):
    s2, r2 = posterior_gamma_poisson(shape, rate, n, total)
    return sample_gamma(ctx, s2, r2)


def sample_posterior_gaussian_mean(ctx, mu0, var0, n, obs_sum, like_var):
    m, v = posterior_gaussian_mean(mu0, var0, n, obs_sum, like_var)
    return sample_gaussian(ctx, m, v)


# Dispatch tables used by the interpreter and code generator.

SAMPLERS = {
    "Bernoulli": sample_bernoulli,
    "Gaussian": sample_gaussian,
    "UniformInt": sample_uniform_int,
    "Poisson": sample_poisson,
    "Beta": sample_beta,
    "Gamma": sample_gamma,
    "Categorical": sample_categorical,
    "UniformChoice": sample_uniform_choice,
}

LOGPDFS = {
    "Bernoulli": logpdf_bernoulli,
    "Gaussian": logpdf_gaussian,
    "UniformInt": logpdf_uniform_int,
    "Poisson": logpdf_poisson,
    "Beta": logpdf_beta,
    "Gamma": logpdf_gamma,
    "Categorical": logpdf_categorical,
    "UniformChoice": logpdf_uniform_choice,
}
