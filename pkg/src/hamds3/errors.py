# This file is part of hamds3.
# hamds3 finds Hamilton cycles in sparse random graphs of minimum degree three with 2GREEDY and extension-rotation.
# Copyright (C) 2025  the hamds3 authors
#
# hamds3 is free software: you can redistribute it and/or modify
# it under the terms of the GNU Affero General Public License as published by
# the Free Software Foundation, either version 3 of the License, or
# (at your option) any later version.
#
# hamds3 is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU Affero General Public License for more details.
#
# You should have received a copy of the GNU Affero General Public License
# along with this program.  If not, see <https://www.gnu.org/licenses/>.

"""
Exception hierarchy shared by all hamds3 modules.
"""


class Hamds3Error(Exception):
    pass


class InputError(Hamds3Error, ValueError):
    """Bad parameters or malformed input files."""


class DegenerateInstance(InputError):
    pass


class TooLarge(InputError):
    pass


class InvalidPivot(InputError):
    pass


class UnknownCheck(InputError):
    pass


class NotSimple(Hamds3Error):
    """A configuration pairing produced a loop or a parallel edge."""

    def __init__(self, loops: int, parallel: int):
        super().__init__(f"Pairing is not simple: {loops} loops, {parallel} parallel edges")
        self.loops = loops
        self.parallel = parallel


class ResampleLimitExceeded(Hamds3Error):
    pass


class NonConvergence(Hamds3Error):
    pass


class ClosureFailure(Hamds3Error):
    pass


class InvariantViolation(Hamds3Error, RuntimeError):
    """Internal state broke one of its invariants. Always a bug."""


class Inconsistent(InvariantViolation):
    pass


class DegreeOverflow(InvariantViolation):
    pass


class VerificationError(InvariantViolation):
    pass


class Disconnected(Hamds3Error):
    pass


class NoTardyEdge(Hamds3Error):
    pass
