"""Shared closed-form fixtures: the planar benchmark model and its barriers."""

import numpy as np

from ucbf.barrier import BarrierFamily, DerivativeStage
from ucbf.model import DynamicsModel

C_VEL = 0.25


def planar_model():
    # x1_dot = x2 - theta x1, x2_dot = u
    return DynamicsModel(
        n=2,
        m=1,
        p=1,
        f=lambda x: np.array([x[1], 0.0]),
        regressor=lambda x: np.array([[x[0], 0.0]]),
        g=lambda x: np.array([[0.0], [1.0]]),
        name="planar",
    )


def velocity_ellipse_barrier():
    # h = 1 - x1^2 - c (x2 - theta x1)^2
    def h(x, th):
        z = x[1] - th[0] * x[0]
        return 1.0 - x[0] ** 2 - C_VEL * z * z

    def grad_x(x, th):
        z = x[1] - th[0] * x[0]
        return np.array([-2.0 * x[0] + 2.0 * C_VEL * th[0] * z, -2.0 * C_VEL * z])

    def grad_theta(x, th):
        z = x[1] - th[0] * x[0]
        return np.array([2.0 * C_VEL * x[0] * z])

    return BarrierFamily(h=h, grad_x=grad_x, grad_theta=grad_theta, relative_degree=1)


def position_limit_barrier():
    # h = 1 - x1^2, input reaches it only through the velocity state
    def hdot(x, th):
        return -2.0 * x[0] * (x[1] - th[0] * x[0])

    stage = DerivativeStage(
        value=hdot,
        grad_x=lambda x, th: np.array([-2.0 * x[1] + 4.0 * th[0] * x[0], -2.0 * x[0]]),
        grad_theta=lambda x, th: np.array([2.0 * x[0] ** 2]),
    )
    return BarrierFamily(
        h=lambda x, th: 1.0 - x[0] ** 2,
        grad_x=lambda x, th: np.array([-2.0 * x[0], 0.0]),
        grad_theta=lambda x, th: np.array([0.0]),
        relative_degree=2,
        chain=(stage,),
    )
