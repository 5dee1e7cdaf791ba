import re
from collections import Counter, defaultdict
from importlib import resources
import numpy as np


ALPHABET = 'abcdefghijklmnopqrstuvwxyz <'
BACKSPACE = '<'
SPACE = ' '


def normalize_text(text):
    """Lower-cases text, maps every character outside a-z to a space and collapses runs of spaces."""
    return re.sub(' +', ' ', re.sub('[^a-z]', ' ', text.lower())).strip()


def load_corpus():
    """The bundled public domain English text."""
    return resources.files('camix').joinpath('data', 'corpus.txt').read_text(encoding='utf-8')


class CharLM:
    r'''Character n-gram language model with interpolated absolute discounting.

    The probability of a symbol after a prefix interpolates the discounted
    counts of all context lengths up to `order` and finally a uniform
    distribution over the alphabet, so every symbol, backspace included,
    has positive probability.

    Parameters
    ----------
    order : int
        Maximal context length.
    discount : float
        Absolute discount in (0, 1).
    alphabet : str
        Symbols of the model.
    '''

    def __init__(self, order=2, discount=0.75, alphabet=ALPHABET):
        if order < 0:
            raise ValueError("order has to be non-negative.")
        if not 0 < discount < 1:
            raise ValueError("discount has to lie in (0, 1).")
        self.order = order
        self.discount = discount
        self.alphabet = alphabet
        self._index = {c: i for i, c in enumerate(alphabet)}
        self.counts = [defaultdict(Counter) for _ in range(order + 1)]

    @classmethod
    def from_corpus(cls, text=None, **kwargs):
        """Model trained on `text`, by default on the bundled corpus."""
        lm = cls(**kwargs)
        lm.train(load_corpus() if text is None else text)
        return lm

    def train(self, text):
        """Adds the n-gram counts of a (normalized) text."""
        text = normalize_text(text)
        for pos, symbol in enumerate(text):
            for k in range(self.order + 1):
                if pos - k < 0:
                    break
                self.counts[k][text[pos - k:pos]][symbol] += 1

    def probs(self, prefix=''):
        """Distribution over the alphabet of the symbol following `prefix`."""
        prefix = self._apply_backspaces(prefix)
        p = np.full(len(self.alphabet), 1 / len(self.alphabet))
        for k in range(self.order + 1):
            if len(prefix) < k:
                break
            counter = self.counts[k].get(prefix[len(prefix) - k:])
            if not counter:
                continue
            total = sum(counter.values())
            discounted = np.zeros(len(self.alphabet))
            for symbol, count in counter.items():
                discounted[self._index[symbol]] = max(count - self.discount, 0.0)
            backoff = self.discount * len(counter) / total
            p = discounted / total + backoff * p
        return p / np.sum(p)

    def prob(self, symbol, prefix=''):
        return float(self.probs(prefix)[self._index[symbol]])

    @staticmethod
    def _apply_backspaces(prefix):
        out = []
        for c in prefix:
            if c == BACKSPACE:
                if out:
                    out.pop()
            else:
                out.append(c)
        return ''.join(out)
