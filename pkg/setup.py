#!/usr/bin/env python3

#  Copyright (C) 2026.
#
#  This program is free software: you can redistribute it and/or modify
#  it under the terms of the GNU General Public License as published by
#  the Free Software Foundation, either version 3 of the License, or
#  (at your option) any later version.
#
#  This program is distributed in the hope that it will be useful,
#  but WITHOUT ANY WARRANTY; without even the implied warranty of
#  MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
#  GNU General Public License for more details.
#
#  You should have received a copy of the GNU General Public License
#  along with this program.  If not, see <http://www.gnu.org/licenses/>.
#


from setuptools import find_packages, setup

with open("requirements.txt") as fp:
    requirements = [line.strip() for line in fp
                    if line.strip() and not line.startswith("pytest")]

setup(
    name="KernelMFT",
    version="0.1.0",
    description=("Kernel mean-field theory of recurrent and deep networks "
                 "in the proportional limit"),
    license="GPLv3",
    packages=find_packages(exclude=["tests"]),
    py_modules=["KernelMFTRunner"],
    install_requires=requirements,
    extras_require={"test": ["pytest>=6.2"]},
    entry_points={"console_scripts": ["kmft=KernelMFTRunner:main"]},
    python_requires=">=3.8"
)
