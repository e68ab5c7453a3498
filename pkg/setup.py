#!/usr/bin/env python
# vim: set fileencoding=utf-8 :

from setuptools import setup, find_packages, dist
dist.Distribution(dict(setup_requires=['bob.extension']))

from bob.extension.utils import load_requirements
install_requires = load_requirements()

# Define package version
version = open("version.txt").read().rstrip()

setup(

    name='bob.emc.incircuit',
    version=version,
    description='In-circuit common-mode impedance extraction with a single inductive probe',
    license='BSD',

    long_description=open('README.rst').read(),

    packages=find_packages(exclude=['examples', 'examples.*']),
    include_package_data=True,
    package_data={'bob.emc.incircuit': ['data/*.json']},
    zip_safe=False,

    python_requires='>=3.6',
    setup_requires=install_requires,
    install_requires=install_requires,

    entry_points={
      'console_scripts': [
        'incircuit = bob.emc.incircuit.script.incircuit:main',
      ],
    },

    classifiers = [
      'Development Status :: 4 - Beta',
      'Intended Audience :: Science/Research',
      'License :: OSI Approved :: BSD License',
      'Natural Language :: English',
      'Programming Language :: Python',
      'Programming Language :: Python :: 3',
      'Topic :: Scientific/Engineering :: Electronic Design Automation (EDA)',
    ],

)
