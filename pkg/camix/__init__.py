r'''
# What is camix?
`camix` is a python package for maximum likelihood estimation of finite mixture models when every observation comes with a probabilistic label derived from its context. Some of its features are:
- the unsupervised (US) and supervised (S) EM baselines and three context-aware estimators: CA replaces the mixing weights in the E-step by the labels, WCA multiplies the E-step terms by them and DCA uses the labels as responsibilities directly.
- univariate and multivariate normal, Maxwell-Boltzmann and linear-regressor components with closed-form weighted M-steps.
- complete, missing and observed information matrices, the EM rate matrix, the theoretical convergence rate and standard errors, cross-checked against [autograd](https://github.com/HIPS/autograd) and [numdifftools](https://github.com/pbrod/numdifftools) Hessians.
- a reproducible Monte Carlo harness comparing the estimators on randomly generated problems with controlled separability, with rank-sum tests between the estimators.
- a closed-loop simulation of a binary tree speller where the labels come from a character language model and the classifier is adapted online.

## Installation
Install the current version from the repository root:
```bash
python -m pip install .
```

## Getting started
```python
>>> import numpy as np
>>> import camix as cx
>>> actual = cx.MixtureSpec([0.6, 0.4], [cx.UnivariateNormal(0.0, 1.0), cx.UnivariateNormal(1.0, 2.0)])
>>> data = cx.sample_mixture(actual, 1000, np.random.default_rng(0))
>>> data = data.with_plabels(cx.make_context_labels(data.truth, 2, ne=0.5))
>>> init = cx.MixtureSpec([0.5, 0.5], [cx.UnivariateNormal(0.49, 1.0), cx.UnivariateNormal(0.51, 2.0)])
>>> res = cx.fit('CA', data, init)
CA fit with 5 free parameters
Iterations: ...
```

# Probabilistic labels
A probabilistic label is a distribution over the components attached to one observation.
Its information content is measured by the negentropy `cx.negentropy`, 0 for the uniform label and 1 for a one-hot label.
`cx.make_label(ne, m, top_class)` constructs the label with a given negentropy whose largest entry sits at `top_class`, `cx.make_context_labels` does so for a whole dataset with correct, partly wrong or randomly informative context.
When the joint distribution of context and class is known, `cx.ContextModel` together with `cx.derive_label_ca_latent`, `cx.derive_label_ca_observed` and `cx.derive_label_wca` derive the labels from it.

# Estimators
All estimators are run through `cx.fit(alg, data, init, config)` which returns a `cx.FitResult`.
The EM loop is configured by `cx.FitConfig`: the tolerance on the parameter change, the iteration cap, the M-step ridge, an optional wall-clock budget, a free mask holding parameters at their initial values and pooling of multivariate covariances.
```python
>>> config = cx.FitConfig(tol=1e-6, free_mask=(True, True, False, True, False))
>>> res = cx.fit('WCA', data, init, config, silent=True)
>>> res.spec.components[0].mu
```
The single steps are available as `cx.e_step` and `cx.m_step`, the objective of each estimator as `cx.incomplete_loglik`.

# Information matrices
`cx.info_matrices(alg, m, data)` evaluates the complete information `i_c`, the missing information `i_m`, the observed information, the rate matrix `i_c^-1 i_m`, its spectral radius, the convergence rate `r_prime` and the standard errors at an estimate.
For the CA estimator the mixing weight rows are dropped.
`cx.observed_info` computes the observed information directly as the Hessian of the log-likelihood, with `autograd` by default and with `numdifftools` for `num_grad=True`.

# Experiments
- `cx.scenarios` generates random estimation problems (`ScenarioSpec`, `generate_problem`), solves them with all estimators (`run_problem`, `run_scenario`) and aggregates the metrics with rank-sum significance tests.
- `cx.experiments` provides the log-likelihood landscape over one free mean (`landscape`) and the standard errors over the information content of the context (`mip_experiment`).
- `cx.speller` simulates spelling with a binary tree speller on a drifting synthetic feature stream.

All of them are also available from the command line:
```bash
camix scenario --id b --problems 100 --out results/b
camix landscape --out results/landscape
camix mip --reps 20 --out results/mip
camix speller --subjects 4 --drift jump --out results/speller
```

# Export data
Mixture specifications, datasets, fit results, information matrices and tables can be exported to json via `cx.input.json.dump_to_json` and read back with `cx.input.json.load_json`.
Tables are written as csv files via `cx.input.pandas.dump_df`, scenario reports via `cx.input.pandas.dump_report`.
'''
from .exceptions import *
from .mixture import *
from .context import *
from .estimators import *
from .information import *
from .stats import *
from .misc import *
from . import scenarios
from . import experiments
from . import language
from . import speller
from . import input
from . import linalg
from . import roots
from . import integrate
from . import special

from .version import __version__
