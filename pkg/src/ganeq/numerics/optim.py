"""Gradient-based update rules."""
import numpy as np


class Adam:
    """Adam with bias-corrected moment estimates.

    The optimizer never touches gradients beyond reading them; callers zero
    them between steps.
    """

    def __init__(self, params, lr=1e-3, betas=(0.9, 0.999), eps=1e-8):
        if lr < 0:
            raise ValueError("learning rate must be non-negative")
        self.params = list(params)
        self.lr = float(lr)
        self.beta1, self.beta2 = betas
        self.eps = eps
        self.step_count = 0
        self.first_moment = [np.zeros_like(p.data) for p in self.params]
        self.second_moment = [np.zeros_like(p.data) for p in self.params]

    def zero_grad(self):
        for p in self.params:
            p.zero_grad()

    def step(self):
        self.step_count += 1
        t = self.step_count
        b1, b2 = self.beta1, self.beta2
        c1 = 1.0 - b1**t
        c2 = 1.0 - b2**t
        for p, m, v in zip(self.params, self.first_moment, self.second_moment):
            g = p.grad
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * g * g
            p.data -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)

    def state_dict(self):
        return {
            "lr": self.lr,
            "step_count": self.step_count,
            "first_moment": [m.copy() for m in self.first_moment],
            "second_moment": [v.copy() for v in self.second_moment],
        }


class SGD:
    def __init__(self, params, lr=1e-2):
        self.params = list(params)
        self.lr = float(lr)

    def zero_grad(self):
        for p in self.params:
            p.zero_grad()

    def step(self):
        for p in self.params:
            p.data -= self.lr * p.grad


class MultiStepLR:
    """Multiply the optimizer's learning rate by ``gamma`` at each milestone."""

    def __init__(self, optimizer, milestones, gamma=0.3):
        milestones = list(milestones)
        if any(b <= a for a, b in zip(milestones, milestones[1:])):
            raise ValueError("milestones must be strictly increasing")
        self.optimizer = optimizer
        self.milestones = milestones
        self.gamma = gamma
        self.base_lr = optimizer.lr

    def lr_at(self, iteration):
        passed = sum(1 for m in self.milestones if iteration >= m)
        return self.base_lr * self.gamma**passed

    def update(self, iteration):
        self.optimizer.lr = self.lr_at(iteration)
