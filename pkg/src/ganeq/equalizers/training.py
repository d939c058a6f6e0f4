"""Adversarial (blind) and supervised training loops."""
from dataclasses import dataclass, field

import numpy as np

from .. import channel as ch
from ..numerics import Adam, MultiStepLR, Tensor, backward, bce_loss, mse_loss, take
from ..numerics.tensor import _accumulate, _result


class NonFiniteLoss(FloatingPointError):
    """Training produced a NaN or infinite loss; the run cannot continue."""


@dataclass
class TrainSchedule:
    """Hyperparameters of one training run.

    Milestones, blur, averaging weight and discriminator size are free
    choices; only ``symbols_per_ti=100``, ``n_d=2``, the 0.3 decay factor and
    the 200-TI averaging window are fixed by the method. The discriminator
    hidden layer defaults to 64 units: the narrow ``L_D/2`` funnel learns too
    slowly to keep up with the generator at the usual learning rates.
    """

    n_ti: int = 20_000
    symbols_per_ti: int = 100
    n_d: int = 2
    lr_g: float = 1e-3
    lr_d: float = 5e-4
    lr_milestones: tuple = None  # absolute TI indices; default 0.5 and 0.8 of n_ti
    lr_gamma: float = 0.3
    blur_var0: float = 0.1
    blur_end: int = None  # TI where the blur reaches zero; default n_ti // 2
    hwa_window: int = 200
    hwa_weight: float = 0.01
    disc_window: int = 20
    disc_hidden: int = 64
    disc_stride: int = None  # default disc_window // 2

    def __post_init__(self):
        if self.n_d < 1:
            raise ValueError("n_d must be >= 1")
        if self.lr_milestones is None:
            self.lr_milestones = (self.n_ti // 2, (self.n_ti * 4) // 5)
        self.lr_milestones = tuple(int(m) for m in self.lr_milestones)
        ms = self.lr_milestones
        if any(b <= a for a, b in zip(ms, ms[1:])) or any(m >= self.n_ti or m < 0 for m in ms):
            raise ValueError("lr_milestones must be strictly increasing and inside [0, n_ti)")
        if self.blur_end is None:
            self.blur_end = self.n_ti // 2
        if self.disc_stride is None:
            self.disc_stride = self.disc_window // 2


def blur_variance(i, schedule):
    """Reference blurring variance: linear from ``blur_var0`` at TI 0 down to 0 at ``blur_end``."""
    if not 0 <= i < schedule.n_ti:
        raise ValueError(f"TI index {i} outside [0, {schedule.n_ti})")
    end = schedule.blur_end
    if end <= 0 or i >= end:
        return 0.0
    return schedule.blur_var0 * (1.0 - i / end)


class HwaState:
    """Ring buffer of the last ``window`` flattened parameter snapshots of a model."""

    def __init__(self, n_param, window=200):
        self.window = window
        self.buffer = np.zeros((window, n_param))
        self.count = 0

    def __len__(self):
        return min(self.count, self.window)

    def append(self, flat):
        self.buffer[self.count % self.window] = flat
        self.count += 1

    def average(self):
        n = len(self)
        if n == 0:
            return None
        return self.buffer[:n].mean(axis=0)


def hwa_penalty(model, state, weight):
    """``weight * sum((theta - theta_avg)^2)`` over all parameters; 0 with no history."""
    avg = state.average()
    params = model.parameters()
    if avg is None or weight == 0.0:
        return Tensor(0.0)
    diffs, value, i = [], 0.0, 0
    for p in params:
        d = p.data - avg[i:i + p.size].reshape(p.shape)
        diffs.append(d)
        value += float(np.sum(d * d))
        i += p.size

    def bw(g):
        for p, d in zip(params, diffs):
            _accumulate(p, 2.0 * weight * g * d)

    return _result(np.asarray(weight * value), params, bw)


def equalize_frame(model, n, spec, rng, context=True):
    """Transmit ``n`` symbols and equalize them.

    With ``context`` the channel frame is extended by the model's margin on
    both sides and the edge outputs are dropped, so every kept output sees a
    fully populated input window.
    """
    m = model.margin if context else 0
    alphabet = spec.constellation
    frame = ch.transmit(ch.draw_symbols(n + 2 * m, alphabet, rng), spec, rng)
    z = model(frame.y)
    if m:
        z = take(z, np.arange(m, m + n))
    return z, frame.x[m:m + n]


def _check(loss, what):
    v = float(loss.data)
    if not np.isfinite(v):
        raise NonFiniteLoss(f"{what} became {v}")
    return v


class GanTrainer:
    """State of one adversarial training run: models, optimizers, schedulers, averages, RNG streams."""

    def __init__(self, generator, discriminator, spec, schedule, channel_rng, reference_rng, context=True):
        self.context = context
        self.G = generator
        self.D = discriminator
        self.spec = spec
        self.schedule = schedule
        self.alphabet = spec.constellation
        self.channel_rng = channel_rng
        self.reference_rng = reference_rng
        self.opt_g = Adam(generator.parameters(), lr=schedule.lr_g)
        self.opt_d = Adam(discriminator.parameters(), lr=schedule.lr_d)
        self.sched_g = MultiStepLR(self.opt_g, schedule.lr_milestones, schedule.lr_gamma)
        self.sched_d = MultiStepLR(self.opt_d, schedule.lr_milestones, schedule.lr_gamma)
        self.hwa_g = HwaState(generator.n_param, schedule.hwa_window)
        self.hwa_d = HwaState(discriminator.n_param, schedule.hwa_window)

    def reference(self, n, blur_var):
        idx = ch.draw_symbols(n, self.alphabet, self.reference_rng)
        x_ref = ch.modulate(idx, self.alphabet)
        if blur_var > 0:
            x_ref = x_ref + self.reference_rng.normal(0.0, np.sqrt(blur_var), size=n)
        return x_ref

    def step(self, i):
        """One training iteration: ``n_d`` discriminator updates, then one generator update."""
        s = self.schedule
        n = s.symbols_per_ti
        self.sched_g.update(i)
        self.sched_d.update(i)
        blur = blur_variance(i, s)
        self.G.train()
        loss_d = None
        for _ in range(s.n_d):
            x_ref = Tensor(self.reference(n, blur))
            z, _ = equalize_frame(self.G, n, self.spec, self.channel_rng, self.context)
            self.opt_d.zero_grad()
            loss_d = (
                bce_loss(self.D(x_ref), 1.0)
                + bce_loss(self.D(z.detach()), 0.0)
                + hwa_penalty(self.D, self.hwa_d, s.hwa_weight)
            )
            _check(loss_d, "discriminator loss")
            backward(loss_d)
            self.opt_d.step()

        self.opt_g.zero_grad()
        loss_g = bce_loss(self.D(z), 1.0) + hwa_penalty(self.G, self.hwa_g, s.hwa_weight)
        _check(loss_g, "generator loss")
        backward(loss_g)
        self.opt_g.step()

        self.hwa_g.append(self.G.flat_parameters())
        self.hwa_d.append(self.D.flat_parameters())
        return {"loss_d": float(loss_d.data), "loss_g": float(loss_g.data), "blur_var": blur, "lr_g": self.opt_g.lr}


def gan_train_iteration(trainer, i):
    return trainer.step(i)


class SupervisedTrainer:
    """MSE training with known transmit symbols; the non-blind reference for any model."""

    def __init__(self, model, spec, lr, channel_rng, schedule=None, context=True):
        self.context = context
        self.model = model
        self.spec = spec
        self.alphabet = spec.constellation
        self.channel_rng = channel_rng
        self.n = schedule.symbols_per_ti if schedule else 100
        self.opt = Adam(model.parameters(), lr=lr)
        self.sched = MultiStepLR(self.opt, schedule.lr_milestones, schedule.lr_gamma) if schedule else None

    def step(self, i):
        if self.sched is not None:
            self.sched.update(i)
        self.model.train()
        z, x = equalize_frame(self.model, self.n, self.spec, self.channel_rng, self.context)
        self.opt.zero_grad()
        loss = mse_loss(z, Tensor(x))
        v = _check(loss, "supervised loss")
        backward(loss)
        self.opt.step()
        return {"loss": v}


def supervised_train_iteration(trainer, i):
    return trainer.step(i)


class LmsTrainer:
    """Data-aided LMS: each TI adapts the filter sample by sample over one fresh frame."""

    def __init__(self, model, spec, channel_rng, symbols_per_ti=100):
        self.model = model
        self.spec = spec
        self.alphabet = spec.constellation
        self.channel_rng = channel_rng
        self.n = symbols_per_ti

    def step(self, i):
        # adapt on the interior only, so no window reaches into zero padding
        m = self.model.margin
        idx = ch.draw_symbols(self.n + 2 * m, self.alphabet, self.channel_rng)
        frame = ch.transmit(idx, self.spec, self.channel_rng)
        errs = self.model.adapt(frame.y, frame.x[m:m + self.n], start=m)
        mse = float(np.mean(errs * errs))
        if not np.isfinite(mse):
            raise NonFiniteLoss(f"LMS error became {mse}")
        return {"loss": mse}


@dataclass
class IdleTrainer:
    """Stands in for equalizers with nothing to learn."""

    model: object = None
    history: list = field(default_factory=list)

    def step(self, i):
        return {}
