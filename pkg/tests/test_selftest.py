"""Every known-answer check from the built-in corpus, one pytest case each."""

import pytest

from volterra_cz import _selftest


@pytest.mark.parametrize("name,fn", _selftest.CHECKS,
                         ids=[name for name, _ in _selftest.CHECKS])
def test_known_answer(name, fn):
    fn()
