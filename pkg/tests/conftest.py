"""Shared fixtures for the runner, CLI and storage tests."""

import pytest

from config.settings import NumericsConfig, PoolConfig, Settings


@pytest.fixture
def settings(tmp_path):
    """Settings writing under tmp_path, threads, small chunks"""
    return Settings(
        out_dir=tmp_path / 'runs',
        log_dir=tmp_path / 'logs',
        pool=PoolConfig(workers=2, chunk_size=4, executor='thread'),
        numerics=NumericsConfig(),
    )


@pytest.fixture
def isolated_env(tmp_path, monkeypatch):
    """Point the environment-driven settings at tmp_path"""
    monkeypatch.setenv('SMOOSH_OUT_DIR', str(tmp_path / 'runs'))
    monkeypatch.setenv('SMOOSH_LOG_DIR', str(tmp_path / 'logs'))
    monkeypatch.setenv('SMOOSH_WORKERS', '1')
    return tmp_path
