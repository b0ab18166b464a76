"""Exception hierarchy. Every error carries the exit status the CLI reports."""


class RandomSetError(Exception):
    exit_code = 2
    kind = 'error'

    @property
    def reason(self):
        return f'error\t{self.kind}\t{self}'


class InputError(RandomSetError, ValueError):
    """Malformed input, duplicate ids, or a violated precondition."""
    kind = 'input'


class DegenerateNullError(RandomSetError):
    """The random-set variance is zero, so Z is undefined."""
    exit_code = 3
    kind = 'degenerate'


class InfeasibleFDRError(InputError):
    """kappa falls outside (0, 1); no threshold delivers the requested FDR."""
    kind = 'infeasible'


class OverlapError(RandomSetError):
    """A correlation entry left [-1, 1]; the overlap counts are wrong."""
    kind = 'overlap'
