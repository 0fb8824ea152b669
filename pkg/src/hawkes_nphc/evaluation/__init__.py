from .metrics import ZERO_TOL, mean_rank_corr, rank_corr, rel_err

__all__ = ["ZERO_TOL", "mean_rank_corr", "rank_corr", "rel_err"]
