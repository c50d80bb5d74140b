import os

from setuptools import find_packages, setup

PACKAGES = ['core', 'gp_model', 'environment', 'policy', 'rollout', 'gradients', 'optimizer', 'harness']


def _ext_modules():
    """Optionaler Cython-Build der Pakete (PIPPS_CYTHONIZE=1)."""
    if os.environ.get('PIPPS_CYTHONIZE') != '1':
        return []
    from Cython.Build import cythonize
    from setuptools.extension import Extension

    extensions = []
    for package in PACKAGES:
        for file_name in sorted(os.listdir(package)):
            if file_name.endswith('.py') and file_name != '__init__.py':
                module = f"{package}.{file_name[:-3]}"
                extensions.append(Extension(module, [os.path.join(package, file_name)]))
    return cythonize(
        extensions,
        build_dir="build_cythonize",
        compiler_directives={
            'language_level': "3",
            'always_allow_keywords': True,
        }
    )


setup(
    name='pipps',
    version='1.0',
    packages=find_packages(include=PACKAGES),
    py_modules=['pipps'],
    install_requires=['numpy>=1.22', 'scipy>=1.8'],
    extras_require={'test': ['pytest>=7'], 'cython': ['Cython>=3.0']},
    entry_points={'console_scripts': ['pipps=harness.cli:main']},
    ext_modules=_ext_modules(),
    url='',
    license='',
    author='steffen',
    author_email='',
    description='Partikelbasierte modellbasierte Policy-Suche mit GP-Dynamikmodellen'
)
