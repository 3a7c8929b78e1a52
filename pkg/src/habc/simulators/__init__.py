"""Benchmark simulators: ``x = f(theta, seed)``."""
from habc.simulators.base import Simulator, degenerate_mask
from habc.simulators.blowfly import BlowflyParams, BlowflySimulator, BlowflyStatistics, blowfly_simulate
from habc.simulators.exp_demo import ExpDemoSimulator, exp_demo_simulate, exp_demo_true_posterior
from habc.simulators.logreg import LogisticRegressionTarget, logreg_minibatch_loglik_and_grad
from habc.simulators.toy import EnumerableToySimulator

__all__ = [
    "Simulator", "degenerate_mask",
    "BlowflyParams", "BlowflySimulator", "BlowflyStatistics", "blowfly_simulate",
    "ExpDemoSimulator", "exp_demo_simulate", "exp_demo_true_posterior",
    "LogisticRegressionTarget", "logreg_minibatch_loglik_and_grad",
    "EnumerableToySimulator",
]
