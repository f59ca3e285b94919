import pathlib
import re

from setuptools import find_packages
from setuptools import setup

from oai_quench_tool import __version__


def read(filename):
    filename = pathlib.Path.joinpath(pathlib.Path(__file__).parent, filename)
    with filename.open(mode="r", encoding='utf-8') as fd:
        return re.sub(r':[a-z]+:`~?(.*?)`', r'``\1``', fd.read())


setup(
    name="oai-quench-tool",
    version=__version__,
    license='LGPL',

    description="quench simulations of the transverse-field Ising chain "
                "under optimized adiabatic-impulse schedules",
    long_description=read("README.md"),
    long_description_content_type="text/markdown",

    packages=find_packages(exclude=('tests', 'tests.*', 'examples', 'examples.*')),

    include_package_data=True,
    package_data={"oai_quench_tool": ["config.toml"]},

    install_requires=["numpy >= 1.21", "scipy >= 1.7", "pandas >= 1.5", "toml",
                      "openpyxl", "click >= 8.0", "SQLAlchemy >= 1.4.0"],
    extras_require={
        "postgresql": ["psycopg2"],
        "mysql": ["mysql-connector-python"],
        "test": ["pytest"],
    },
    python_requires=">=3.8",

    entry_points={
        "console_scripts": [
            "oaitool=oai_quench_tool.__main__:main",
        ]
    },

    classifiers=[
        'Development Status :: 3 - Alpha',
        'License :: OSI Approved :: GNU Lesser General Public License v2 or later (LGPLv2+)',
        'Programming Language :: Python',
        'Programming Language :: Python :: 3.8',
        'Topic :: Scientific/Engineering :: Physics',
    ],
)
