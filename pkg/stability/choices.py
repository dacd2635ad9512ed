from django.db import models
from django.utils.translation import gettext_lazy as _


class NormKind(models.TextChoices):
    L1 = "l1", _("l1")
    L2 = "l2", _("l2")
    LINF = "linf", _("linf")


class CoreKind(models.TextChoices):
    COMPLEX_LINEAR = "complex_linear", _("Complex linear")
    REAL_LINEAR = "real_linear", _("Real linear")


class PerturbationKind(models.TextChoices):
    NONE = "none", _("None")
    BOUNDED = "bounded", _("Bounded")
    POWER = "power", _("Power")
    TABULATED = "tabulated", _("Tabulated")


class DirectionMode(models.TextChoices):
    HASHED = "hashed", _("Hashed")
    FIXED = "fixed", _("Fixed")


class Family(models.TextChoices):
    A = "A", _("Family A")
    B = "B", _("Family B")


class Direction(models.TextChoices):
    FORWARD = "forward", _("Forward")
    BACKWARD = "backward", _("Backward")


class SchemeKind(models.TextChoices):
    DYADIC = "dyadic", _("Dyadic")
    BETA = "beta", _("1 + beta")


class ControlKind(models.TextChoices):
    ZERO = "zero", _("Zero")
    POWER = "power", _("Power")
    TABULATED = "tabulated", _("Tabulated")
    MEASURED = "measured", _("Measured")


class TailMode(models.TextChoices):
    GEOMETRIC = "geometric", _("Geometric")
    NONE = "none", _("None")


class Corollary(models.TextChoices):
    C24 = "c24", _("Forward dyadic, r < 1")
    C26 = "c26", _("Backward dyadic, r > 1")
    C34 = "c34", _("Forward 1 + beta, |1 + beta| > 1")
    C36 = "c36", _("Backward 1 + beta, |1 + beta| < 1")


class ReportFormat(models.TextChoices):
    JSON = "json", _("JSON")
    CSV = "csv", _("CSV")
