"""
Test Acceptance Suite

The quick criteria must pass at the default seed; a perturbed K₀ must be
caught; the full suite runs under the slow marker.
"""

import pytest

from smoosh.analysis import constants
from smoosh.core.base import LabStatus
from smoosh.runner.acceptance import CRITERIA, DEFAULT_SEED, verify

FAST = ['lens-integral', 'capture-constant', 'ellipticity', 'skorokhod', 'lattice-scaling', 'stage-duration']


class TestCriteriaTable:
    """Test the criteria registry"""

    def test_names_and_order(self):
        """Test eleven criteria in order with the quick subset flagged"""
        assert [c.name for c in CRITERIA] == [
            'lens-integral', 'capture-constant', 'ellipticity', 'skorokhod', 'one-point', 'sigma-uniformity',
            'coupling-inequality', 'lattice-scaling', 'stage-duration', 'capture-frequency', 'clusters',
        ]
        assert [c.name for c in CRITERIA if c.fast] == FAST


class TestVerify:
    """Test verify()"""

    def test_fast_suite_passes(self, settings, tmp_path):
        """Test every quick criterion passes at the default seed"""
        response = verify(fast=True, settings=settings, out_dir=tmp_path / 'reports')
        rows = response.data['rows']
        assert [r['criterion'] for r in rows] == FAST
        assert response.success, response.data['failed']
        assert all(r['runtime_s'] >= 0 for r in rows)
        assert len(response.data['artifacts']) == 2
        assert (tmp_path / 'reports' / f'verify-fast-{DEFAULT_SEED}' / 'verify_report.csv').exists()

    def test_perturbed_bessel_fails(self, settings, monkeypatch):
        """Test a 1% error in K₀ is detected"""
        exact = constants.bessel_k0
        monkeypatch.setattr(constants, 'bessel_k0', lambda z: 1.01 * exact(z))
        response = verify(settings=settings, only=['capture-constant'])
        assert not response.success
        assert response.status == LabStatus.ERROR
        assert response.data['failed'] == ['capture-constant']
        assert 'capture-constant' in response.error

    def test_raising_criterion_is_a_failure(self, settings, monkeypatch):
        """Test an exception inside a check becomes a failed row"""
        def broken(*args, **kwargs):
            raise FloatingPointError('overflow')

        monkeypatch.setattr('smoosh.runner.acceptance.lens_integral', broken)
        response = verify(settings=settings, only=['lens-integral'])
        row = response.data['rows'][0]
        assert not row['passed']
        assert row['measured']['error'] == 'FloatingPointError: overflow'

    def test_only_filters(self, settings):
        """Test the only filter with the fast flag"""
        response = verify(fast=True, settings=settings, only=['lens-integral', 'one-point'])
        assert [r['criterion'] for r in response.data['rows']] == ['lens-integral']

    @pytest.mark.slow
    def test_full_suite(self, tmp_path):
        """Test all criteria pass with a process pool"""
        from config.settings import load_settings
        settings = load_settings()
        settings.log_dir = tmp_path / 'logs'
        response = verify(settings=settings, out_dir=tmp_path / 'reports')
        assert response.success, response.data['failed']
