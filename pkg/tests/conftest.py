"""Shared fixtures: pin the configuration to the shipped toolkit.yaml."""

from pathlib import Path

import pytest

from config_loader import reload_config

ROOT = Path(__file__).resolve().parent.parent


@pytest.fixture(autouse=True, scope='session')
def shipped_config():
    return reload_config(ROOT / 'toolkit.yaml')


@pytest.fixture
def config(shipped_config):
    return shipped_config


@pytest.fixture(scope='session')
def rings_dir():
    return ROOT / 'rings'
