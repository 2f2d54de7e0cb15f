#!/usr/bin/env python3
"""
Packaging for the S²×S² quotient toolkit.
Installs the flat modules and the `s2s2` console command.
"""

from pathlib import Path

from setuptools import setup

HERE = Path(__file__).parent


def read_requirements(name: str):
    lines = (HERE / name).read_text().splitlines()
    return [line.strip() for line in lines if line.strip() and not line.startswith(('#', '-r'))]


setup(
    name='s2s2-quotients',
    version='1.0.0',
    description='Exact and numerical computations for free quotients of S2xS2',
    python_requires='>=3.9',
    py_modules=[
        'ahss_bordism', 'cli', 'config_loader', 'exact_linalg', 'f2_rings', 'gamma_quadratic',
        'group_homalg', 'kkr', 'quat_geom', 'reference_suite', 'utils',
    ],
    install_requires=read_requirements('requirements.txt'),
    extras_require={'dev': ['pytest>=7.0.0']},
    entry_points={'console_scripts': ['s2s2=cli:main']},
)
