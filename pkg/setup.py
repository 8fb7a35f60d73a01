from pathlib import Path
from typing import List

from setuptools import setup, find_packages


def parse_requirements(filename: str) -> List[str]:
    """Return requirements from requirements file."""
    # Ref: https://stackoverflow.com/a/42033122/
    requirements = (Path(__file__).parent / filename).read_text().strip().split('\n')
    requirements = [r.strip() for r in requirements]
    requirements = [r for r in sorted(requirements) if r and not r.startswith('#')]
    return requirements


setup(
    name='socdyn',
    version='0.1.0',
    description='Simulation and convergence checks for a mean-field self-organized criticality dynamics',
    keywords='langevin mala mean-field self-organized-criticality sde simulation',
    long_description=Path(__file__).with_name('README.md').read_text().strip(),
    long_description_content_type='text/markdown',
    packages=find_packages(exclude=['scripts', 'tests']),
    install_requires=parse_requirements('requirements/install.in'),
    python_requires='>=3.8',
    package_data={'socdyn': ['logging.conf']},
    entry_points={'console_scripts': ['socdyn=socdyn.cli:main']},
    classifiers=[  # https://pypi.org/classifiers/
        "Programming Language :: Python :: 3.8",
        "Intended Audience :: Science/Research",
        "Topic :: Scientific/Engineering :: Mathematics",
        "Topic :: Scientific/Engineering :: Physics",
    ],
)
