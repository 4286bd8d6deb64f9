from setuptools import find_packages, setup

setup(
    name='dialogue-coherence',
    package_dir={'': 'src'},
    packages=find_packages(where='src'),
    py_modules=['cli', 'config', 'paths'],
    version='1.0.0',
    description='Entity and dialogue-act grid coherence models for dialogue',
    license='MIT',
    entry_points={'console_scripts': ['dialogue-coherence=cli:main']},
)
