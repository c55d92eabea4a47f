#!/usr/bin/env python3
# -*- coding: utf-8 -*-

import os
from setuptools import setup


def _read(fn):
    path = os.path.join(os.path.dirname(__file__), fn)
    return open(path).read()


setup(
    name='shortlaw',
    version='0.1',
    description='Short laws for finite groups, law certificates and a residual finiteness oracle for F2',
    license='MIT',
    platforms='ALL',
    long_description=_read('README.md'),
    test_suite='test',
    zip_safe=False,
    include_package_data=True,  # Install catalog and configuration.

    packages=[
        'shortlaw',
        'shortlaw.conf',
        'shortlaw.lib',
        'shortlaw.ui'
    ],
    package_data={  # Optional
        "shortlaw.conf": ["*.yaml",
                          "*.txt"],
    },
    entry_points={
        'console_scripts': [
            'shortlaw = shortlaw.ui:main',
        ],
    },

    install_requires=[
        'argparse',
        'numpy',
        'pandas',
        'pyyaml',
        'scipy',
        'sympy',
        'tenacity',
        'termcolor',
    ],

    extras_require={
        'dev': [
            'hypothesis',
            'pytest',
            'ipdb'
        ]
    },

    tests_require=[
        'hypothesis',
        'pytest',
        'ipdb'
    ],

    classifiers=[
        'License :: OSI Approved :: MIT License',
        'Environment :: Console',
        'Intended Audience :: Science/Research',
        'Topic :: Scientific/Engineering :: Mathematics',
        'Programming Language :: Python',
        'Programming Language :: Python :: 3',
        'Programming Language :: Python :: 3.9',
        'Programming Language :: Python :: Implementation :: CPython',
    ],
)
