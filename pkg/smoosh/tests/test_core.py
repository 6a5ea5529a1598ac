"""Unit Tests for the response envelope, error types and replica streams."""

import numpy as np
import pytest

from smoosh.core.base import LabResponse, LabStatus
from smoosh.core.errors import QuadratureError, UndersampledError
from smoosh.core.rng import MAX_SEED, replica_rng, replica_seed_words


class TestLabResponse:
    """Test LabResponse"""

    def test_failure_defaults_to_error(self):
        """Test success=False without a status becomes ERROR"""
        response = LabResponse(success=False)
        assert response.status == LabStatus.ERROR
        assert response.metadata['timestamp'].endswith('Z')

    def test_error_response(self):
        """Test the error constructor and serialisation"""
        response = LabResponse.error_response("bad", context={'command': 'couple'}, status=LabStatus.PARTIAL)
        payload = response.to_dict()
        assert payload['status'] == 'partial'
        assert payload['error'] == 'bad'
        assert payload['data'] is None


class TestErrors:
    """Test error payloads"""

    def test_undersampled_message(self):
        """Test the required count is kept and reported"""
        err = UndersampledError("too few", 60)
        assert err.required == 60
        assert '60' in str(err)
        assert isinstance(err, ValueError)

    def test_quadrature_error(self):
        """Test QuadratureError is a runtime error"""
        with pytest.raises(RuntimeError):
            raise QuadratureError("no convergence", 1e-3)


class TestReplicaStreams:
    """Test per-replica generators"""

    def test_reproducible(self):
        """Test the same (seed, replica) gives the same stream"""
        assert replica_rng(7, 3).random(4).tolist() == replica_rng(7, 3).random(4).tolist()

    def test_streams_differ(self):
        """Test neighbouring replicas and seeds differ"""
        base = replica_rng(7, 3).random(4)
        assert not np.array_equal(base, replica_rng(7, 4).random(4))
        assert not np.array_equal(base, replica_rng(8, 3).random(4))

    def test_seed_words(self):
        """Test one distinct 64-bit word per replica"""
        words = replica_seed_words(MAX_SEED, 50)
        assert len(words) == 50 == len(set(words))
        assert all(0 <= w <= MAX_SEED for w in words)
        assert replica_seed_words(1, 0) == []
