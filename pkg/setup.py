from setuptools import setup, find_packages


if __name__ == '__main__':
    setup(
        name='warpends',
        version='0.1.0',
        description='Numerical experiments on the Dirichlet problem at infinity for '
                    'warped-product ends',
        keywords='warped product harmonic functions dirichlet problem finite differences',

        packages=find_packages(
            exclude=['tests'],
        ),
        entry_points={
            'console_scripts': [
                'warpends = warpends.app:main',
            ],
        },

        package_data={
            'warpends': [
                'experiments/*.py',
            ],
        },
        python_requires='>=3.9',
        install_requires=[
            'numpy >= 1.22',
            'scipy >= 1.12',
        ],
        extras_require={
            'test': [
                'pytest',
                'pytest-pycodestyle',
                'pytest-flakes',
                'pytest-mypy',
                'pytest-cov',
                'mpmath',
            ],
        },
    )
