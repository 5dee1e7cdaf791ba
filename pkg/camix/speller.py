"""Closed-loop simulation of a binary tree speller driven by an online context-aware classifier."""
import logging
from collections import deque
from dataclasses import dataclass, field
import numpy as np
import pandas as pd
from .context import negentropy
from .estimators import FitConfig, e_step, fit
from .exceptions import DegenerateComponentError
from .families import MultivariateNormal
from .language import ALPHABET, BACKSPACE, CharLM
from .linalg import random_spd
from .misc import derive_rng
from .mixture import LabeledDataset, MixtureSpec
from .stats import balanced_accuracy

logger = logging.getLogger(__name__)

SPELLER_ALGORITHMS = ('S', 'CA', 'CAE')
DEFAULT_WORDS = ('the', 'quick', 'brown', 'fox', 'jumps', 'over', 'the', 'lazy', 'dog')
TRACE_COLUMNS = ['subject', 'algorithm', 'window_end_sample', 'running_ba']
SUMMARY_COLUMNS = ['subject', 'algorithm', 'mean_running_ba', 'n_samples', 'n_commands', 'n_errors', 'n_chars',
                   'mean_ne', 'truncated']
LEFT, RIGHT = 0, 1


@dataclass(frozen=True)
class SpellerConfig:
    """Settings of the online learner and of the speller loop.

    Attributes
    ----------
    buffer_size : int
        Capacity of the sliding sample buffer.
    online_iters : int
        EM iterations per incoming sample.
    command_threshold : int
        Net number of decisions for one side that issues a command.
    window : int
        Length of the running balanced accuracy window.
    step : int
        Samples between two running balanced accuracy evaluations.
    split_target : float
        Target mass fraction of the heavy subtree.
    blend : bool
        Blend the buffered estimate into the previous classifier instead of
        replacing it.
    init_offset : float
        Distance of the initial classifier means from the true initial means.
    ridge : float
        Covariance ridge of the M-step.
    warmup : int
        Number of buffered samples before the first update.
    min_class_mass : float
        Minimal responsibility mass of each class in the buffer, smaller
        masses skip the update.
    iter_budget_ms : float or None
        Optional wall-clock budget of each online EM run.
    """
    buffer_size: int = 240
    online_iters: int = 3
    command_threshold: int = 8
    window: int = 120
    step: int = 60
    split_target: float = 0.9
    blend: bool = False
    init_offset: float = 1.0
    ridge: float = 1e-8
    warmup: int = 20
    min_class_mass: float = 1.0
    iter_budget_ms: float = None

    def __post_init__(self):
        if self.buffer_size < 1 or self.online_iters < 1 or self.command_threshold < 1:
            raise ValueError("buffer_size, online_iters and command_threshold have to be positive.")
        if not 0 < self.step <= self.window:
            raise ValueError("step has to lie in (0, window].")
        if not 0.5 <= self.split_target < 1:
            raise ValueError("split_target has to lie in [0.5, 1).")


@dataclass(frozen=True)
class DriftSpec:
    """Piecewise-linear drift of the class means and slow scaling of the shared covariance.

    The mean of each class moves by `magnitude` along a random direction,
    following the piecewise-linear profile through (knots, levels) over the
    normalized stream time in [0, 1].
    """
    name: str = 'slow'
    magnitude: float = 1.5
    knots: tuple = (0.0, 1.0)
    levels: tuple = (0.0, 1.0)
    cov_growth: float = 0.2

    @classmethod
    def preset(cls, name):
        presets = {'none': cls('none', 0.0, (0.0, 1.0), (0.0, 0.0), 0.0),
                   'slow': cls('slow', 1.5, (0.0, 1.0), (0.0, 1.0), 0.2),
                   'jump': cls('jump', 1.5, (0.0, 0.45, 0.55, 1.0), (0.0, 0.0, 1.0, 1.0), 0.2)}
        try:
            return presets[name]
        except KeyError:
            raise ValueError(f"Unknown drift preset '{name}', use one of {', '.join(presets)}.") from None

    def profile(self, t):
        return np.interp(t, self.knots, self.levels)


@dataclass(frozen=True, eq=False)
class TreeNode:
    """Node of the speller tree. Leaves carry a single symbol."""
    symbols: str
    mass: float
    depth: int = 0
    phase: int = 0
    left: 'TreeNode' = None
    right: 'TreeNode' = None

    @property
    def is_leaf(self):
        return self.left is None

    @property
    def heavy(self):
        """Side designated to carry the heavy subtree, None for leaves."""
        if self.is_leaf:
            return None
        return 'left' if (self.depth + self.phase) % 2 == 0 else 'right'

    def leaves(self):
        if self.is_leaf:
            return self.symbols
        return self.left.leaves() + self.right.leaves()


def build_tree(priors, split_target=0.9, phase=0, alphabet=ALPHABET, depth=0):
    r'''Builds the speller tree for a prior over the alphabet.

    Every node is split into two contiguous ranges of symbols, the split
    point minimizing the distance of the heavy side's mass fraction to
    `split_target`. The heavy side is left where depth + phase is even and
    right otherwise.

    Parameters
    ----------
    priors : array_like
        Probabilities of the symbols of `alphabet`.
    split_target : float
        Target mass fraction of the heavy subtree.
    phase : int
        0 or 1, flips the heavy side of every level.
    alphabet : str
        Symbols in leaf order.
    depth : int
        Depth of the returned node.

    Returns
    -------
    root : TreeNode
    '''
    priors = np.asarray(priors, dtype=float)
    if len(priors) != len(alphabet):
        raise ValueError(f"{len(priors)} probabilities for {len(alphabet)} symbols.")
    if np.any(priors < 0):
        raise ValueError("Probabilities have to be non-negative.")
    return _build(alphabet, priors, split_target, phase % 2, depth)


def _build(symbols, masses, split_target, phase, depth):
    total = float(np.sum(masses))
    if len(symbols) == 1:
        return TreeNode(symbols, total, depth, phase)
    heavy_left = (depth + phase) % 2 == 0
    cum = np.cumsum(masses)[:-1]
    frac = cum / total if total > 0 else np.arange(1, len(symbols)) / len(symbols)
    heavy = frac if heavy_left else 1 - frac
    k = int(np.argmin(np.abs(heavy - split_target))) + 1
    return TreeNode(symbols, total, depth, phase,
                    _build(symbols[:k], masses[:k], split_target, phase, depth + 1),
                    _build(symbols[k:], masses[k:], split_target, phase, depth + 1))


def rebuild_flipped(node, priors, split_target=0.9, alphabet=ALPHABET):
    """Subtree of `node` rebuilt with the heavy side reversed on every level."""
    idx = [alphabet.index(c) for c in node.symbols]
    return _build(node.symbols, np.asarray(priors, dtype=float)[idx], split_target, 1 - node.phase, node.depth)


def context_label_at_node(node, priors=None, alphabet=ALPHABET):
    """Label over (left, right): the renormalized masses of the two subtrees of an internal node."""
    if node.is_leaf:
        raise ValueError("Leaves carry no decision.")
    if priors is None:
        masses = np.array([node.left.mass, node.right.mass])
    else:
        priors = np.asarray(priors, dtype=float)
        masses = np.array([sum(priors[alphabet.index(c)] for c in sub.symbols) for sub in (node.left, node.right)])
    return masses / np.sum(masses)


@dataclass(eq=False)
class OnlineBuffer:
    """Sliding buffer of recent samples and labels with the current two-class classifier."""
    spec: MixtureSpec
    capacity: int = 240
    samples: deque = field(default=None)
    labels: deque = field(default=None)

    def __post_init__(self):
        self.samples = deque(maxlen=self.capacity)
        self.labels = deque(maxlen=self.capacity)

    def __len__(self):
        return len(self.samples)

    def push(self, sample, plabel):
        self.samples.append(np.asarray(sample, dtype=float))
        self.labels.append(np.asarray(plabel, dtype=float))


def _blend(previous, update, resp, capacity):
    b = resp.sum(axis=0)
    means = [((capacity - b_j) * p.mu + b_j * u.mu) / capacity
             for b_j, p, u in zip(b, previous.components, update.components)]
    b_tot = min(np.sum(b), capacity)
    cov = ((capacity - b_tot) * previous.components[0].cov + b_tot * update.components[0].cov) / capacity
    cov = 0.5 * (cov + cov.T)
    return MixtureSpec(previous.weights, [MultivariateNormal(mu, cov) for mu in means])


def step_online(buf, sample, plabel, config=None):
    r'''Classifies an incoming sample and updates the classifier on the buffer.

    The sample is classified by the maximum-a-posteriori rule under the
    current classifier, pushed into the buffer (evicting the oldest sample
    of a full buffer) and CA EM with a pooled covariance is run on the
    buffer for at most config.online_iters iterations, starting from the
    current classifier. The mixing weights stay fixed. Updates are skipped
    while fewer than config.warmup samples are buffered, while a class holds
    less than config.min_class_mass of the responsibilities under the
    current classifier and whenever a component collapses during EM.

    Returns
    -------
    decision : int
        0 (left) or 1 (right).
    buf : OnlineBuffer
        The updated buffer.
    '''
    config = config or SpellerConfig()
    decision = int(buf.spec.classify(np.atleast_2d(sample))[0])
    buf.push(sample, plabel)
    if len(buf) < config.warmup:
        return decision, buf
    data = LabeledDataset(np.array(buf.samples), plabels=np.array(buf.labels))
    mass = e_step('CA', buf.spec, data).sum(axis=0)
    if np.any(mass < config.min_class_mass):
        return decision, buf
    mask = np.ones(buf.spec.n_params, dtype=bool)
    mask[buf.spec.weight_slice()] = False
    fit_config = FitConfig(max_iter=config.online_iters, m_step_regularization=config.ridge,
                           iter_budget_ms=config.iter_budget_ms, free_mask=tuple(mask), shared_covariance=True)
    try:
        res = fit('CA', data, buf.spec, fit_config, silent=True)
    except DegenerateComponentError as err:
        logger.debug("Online update skipped: %s", err)
        return decision, buf
    buf.spec = _blend(buf.spec, res.spec, res.responsibilities, buf.capacity) if config.blend else res.spec
    return decision, buf


class StreamExhausted(IndexError):
    """No samples of the requested class are left."""


@dataclass(eq=False)
class SubjectStream:
    """Pre-generated per-class feature queues of a pseudo-subject, played back in order."""
    class_samples: tuple
    initial_means: np.ndarray
    initial_cov: np.ndarray
    drift_directions: np.ndarray
    drift: DriftSpec
    positions: list = field(default_factory=lambda: [0, 0])

    def next(self, cls):
        queue = self.class_samples[cls]
        if self.positions[cls] >= len(queue):
            raise StreamExhausted(f"Class {cls} stream exhausted after {len(queue)} samples.")
        sample = queue[self.positions[cls]]
        self.positions[cls] += 1
        return sample

    def reset(self):
        self.positions = [0, 0]

    def mean_at(self, cls, t):
        """Programmed class mean at normalized time t."""
        return self.initial_means[cls] + self.drift.magnitude * self.drift.profile(t) * self.drift_directions[cls]


def synth_stream(drift, rng, n_per_class=4000, n_features=6, separation=2.0):
    r'''Synthetic two-class feature stream with drifting class means.

    Parameters
    ----------
    drift : DriftSpec or str
        Drift of the means (preset name or spec).
    rng : numpy.random.Generator
        Seeded generator.
    n_per_class : int
        Length of each class queue.
    n_features : int
        Feature dimension.
    separation : float
        Initial distance between the class means.

    Returns
    -------
    stream : SubjectStream
    '''
    if isinstance(drift, str):
        drift = DriftSpec.preset(drift)
    base_cov = random_spd(rng, n_features, eig_range=(0.5, 1.5), floor=0.5)
    unit = rng.normal(size=n_features)
    unit /= np.linalg.norm(unit)
    means = np.stack([np.zeros(n_features), separation * unit])
    directions = rng.normal(size=(2, n_features))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    chol = np.linalg.cholesky(base_cov)
    t = np.arange(n_per_class) / max(n_per_class - 1, 1)
    queues = []
    for cls in range(2):
        offset = drift.magnitude * drift.profile(t)[:, None] * directions[cls]
        scale = np.sqrt(1 + drift.cov_growth * t)[:, None]
        noise = rng.normal(size=(n_per_class, n_features)) @ chol.T
        queues.append(means[cls] + offset + scale * noise)
    return SubjectStream(tuple(queues), means, base_cov, directions, drift)


def initial_classifier(stream, rng, offset=1.0):
    """LDA classifier on the true initial class means, each shifted by `offset` along a random direction."""
    comps = []
    for cls in range(2):
        direction = rng.normal(size=len(stream.initial_means[cls]))
        direction /= np.linalg.norm(direction)
        comps.append(MultivariateNormal(stream.initial_means[cls] + offset * direction, stream.initial_cov))
    return MixtureSpec([0.5, 0.5], comps)


def _label_for(algorithm, node, desired, priors):
    if algorithm == 'S':
        label = np.zeros(2)
        label[desired] = 1.0
        return label
    if algorithm == 'CAE':
        return np.full(2, 0.5)
    return context_label_at_node(node, priors)


def running_ba(decisions, truths, window=120, step=60):
    """(window_end_sample, balanced accuracy) over the trailing window, every `step` samples."""
    out = []
    for end in range(window, len(decisions) + 1, step):
        out.append((end, balanced_accuracy(decisions[end - window:end], truths[end - window:end])))
    return out


@dataclass(eq=False)
class SpellingResult:
    """Decisions, running balanced accuracy and command statistics of one spelling session."""
    algorithm: str
    decisions: list
    truths: list
    trace: list
    n_commands: int
    n_errors: int
    typed: str
    mean_ne: float
    truncated: bool


def simulate_spelling(stream, words, lm, config=None, algorithm='CA', init=None):
    r'''Spells `words` in closed loop with an online adapted classifier.

    For each character the tree is built from the language model prior of
    the typed prefix. At every internal node samples of the class of the
    side holding the target are played back and classified until the net
    decision count reaches config.command_threshold. A correct command
    descends, an erroneous one keeps the node and rebuilds its subtree with
    the heavy side reversed.

    The language model is conditioned on the typed prefix of every character
    but its counts are never updated with the typed text.

    Parameters
    ----------
    stream : SubjectStream
        Feature stream, consumed from its current position.
    words : sequence of str
        Words to spell, separated by spaces.
    lm : CharLM
        Language model providing the priors.
    config : SpellerConfig, optional
        Speller settings.
    algorithm : str
        'S' (one-hot labels), 'CA' (tree labels) or 'CAE' (ignorant labels).
    init : MixtureSpec, optional
        Initial classifier, by default the true initial means with an offset.

    Returns
    -------
    result : SpellingResult
        `truncated` is set if the stream ran out before the text was typed.
    '''
    config = config or SpellerConfig()
    if algorithm not in SPELLER_ALGORITHMS:
        raise ValueError(f"Unknown speller algorithm '{algorithm}', use one of {', '.join(SPELLER_ALGORITHMS)}.")
    if init is None:
        init = initial_classifier(stream, np.random.default_rng(0), config.init_offset)
    target = ' '.join(words)
    buf = OnlineBuffer(init, config.buffer_size)
    decisions, truths, nes = [], [], []
    n_commands = n_errors = 0
    typed = ''
    truncated = False
    try:
        while typed != target:
            symbol = target[len(typed)] if target.startswith(typed) else BACKSPACE
            priors = lm.probs(typed)
            node = build_tree(priors, config.split_target)
            while not node.is_leaf:
                desired = LEFT if symbol in node.left.symbols else RIGHT
                plabel = _label_for(algorithm, node, desired, priors)
                ne = negentropy(plabel)
                net = 0
                while abs(net) < config.command_threshold:
                    decision, buf = step_online(buf, stream.next(desired), plabel, config)
                    decisions.append(decision)
                    truths.append(desired)
                    nes.append(ne)
                    net += 1 if decision == LEFT else -1
                n_commands += 1
                command = LEFT if net > 0 else RIGHT
                if command == desired:
                    node = node.left if command == LEFT else node.right
                else:
                    n_errors += 1
                    node = rebuild_flipped(node, priors, config.split_target)
            typed = typed[:-1] if node.symbols == BACKSPACE else typed + node.symbols
    except StreamExhausted as err:
        logger.warning("Spelling with %s truncated: %s", algorithm, err)
        truncated = True
    trace = running_ba(decisions, truths, config.window, config.step)
    mean_ne = float(np.mean(nes)) if nes else np.nan
    return SpellingResult(algorithm, decisions, truths, trace, n_commands, n_errors, typed, mean_ne, truncated)


def run_speller(subjects=12, words=DEFAULT_WORDS, algorithms=SPELLER_ALGORITHMS, drift='slow', seed=0, config=None,
                lm=None, n_per_class=4000):
    r'''Runs the spelling simulation for several pseudo-subjects and algorithms.

    Every subject has its own stream and initial classifier, shared by all
    algorithms.

    Returns
    -------
    trace : pandas.DataFrame
        Columns subject, algorithm, window_end_sample and running_ba.
    summary : pandas.DataFrame
        One row per subject and algorithm.
    '''
    config = config or SpellerConfig()
    lm = lm or CharLM.from_corpus()
    trace_rows, summary_rows = [], []
    for subject in range(subjects):
        rng = derive_rng(seed, 'subject', subject)
        stream = synth_stream(drift, rng, n_per_class=n_per_class)
        init = initial_classifier(stream, rng, config.init_offset)
        for algorithm in algorithms:
            stream.reset()
            res = simulate_spelling(stream, words, lm, config, algorithm, init)
            trace_rows += [(subject, algorithm, end, ba) for end, ba in res.trace]
            summary_rows.append((subject, algorithm, float(np.mean([ba for _, ba in res.trace])) if res.trace else np.nan,
                                 len(res.decisions), res.n_commands, res.n_errors, len(res.typed), res.mean_ne,
                                 res.truncated))
            logger.info("Subject %d, %s: %d commands, %d errors", subject, algorithm, res.n_commands, res.n_errors)
    return pd.DataFrame(trace_rows, columns=TRACE_COLUMNS), pd.DataFrame(summary_rows, columns=SUMMARY_COLUMNS)


__all__ = ['SpellerConfig', 'DriftSpec', 'TreeNode', 'build_tree', 'rebuild_flipped', 'context_label_at_node',
           'OnlineBuffer', 'step_online', 'SubjectStream', 'StreamExhausted', 'synth_stream', 'initial_classifier',
           'running_ba', 'SpellingResult', 'simulate_spelling', 'run_speller']
