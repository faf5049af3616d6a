import math
import uuid

from django.db import models
from model_utils.models import TimeStampedModel

from irsnoma.choices import ExperimentKind, Scenario


class ExperimentRun(TimeStampedModel):
    id = models.UUIDField(primary_key=True, default=uuid.uuid4, editable=False)
    kind = models.CharField(max_length=20, choices=ExperimentKind.choices)
    scenario = models.CharField(max_length=20, choices=Scenario.choices)
    seed = models.BigIntegerField()
    trials = models.BigIntegerField()
    config_path = models.CharField(max_length=500, blank=True)
    output_path = models.CharField(max_length=500)
    rows_written = models.PositiveIntegerField(default=0)
    notes = models.TextField(blank=True, help_text='Reason codes for blank analytic columns and skipped fits')
    fits = models.TextField(blank=True)

    class Meta:
        ordering = ['-created']

    def __str__(self):
        return f"{self.get_kind_display()} ({self.get_scenario_display()}, seed {self.seed})"

    @property
    def has_notes(self):
        return bool(self.notes)


class SweepResult(models.Model):
    """One CSV row of a run. ``b`` is null for continuous phases."""
    run = models.ForeignKey(ExperimentRun, on_delete=models.CASCADE, related_name='results')
    position = models.PositiveIntegerField()
    experiment = models.CharField(max_length=20, choices=ExperimentKind.choices)
    scenario = models.CharField(max_length=20, choices=Scenario.choices)
    scheme = models.CharField(max_length=10, blank=True)
    user = models.PositiveSmallIntegerField(null=True, blank=True)
    rho_db = models.FloatField(null=True, blank=True)
    b = models.PositiveSmallIntegerField(null=True, blank=True)
    K = models.PositiveIntegerField()
    N = models.PositiveSmallIntegerField()
    trials = models.BigIntegerField(null=True, blank=True)
    failures = models.BigIntegerField(null=True, blank=True)
    p_hat = models.FloatField(null=True, blank=True)
    ci_low = models.FloatField(null=True, blank=True)
    ci_high = models.FloatField(null=True, blank=True)
    analytic_upper = models.FloatField(null=True, blank=True)
    analytic_lower = models.FloatField(null=True, blank=True)
    diversity = models.FloatField(null=True, blank=True)

    class Meta:
        ordering = ['run', 'position']
        unique_together = ['run', 'position']

    def __str__(self):
        user = f"U{self.user}" if self.user else '-'
        return f"{self.scheme or self.experiment} {user} @ {self.rho_db} dB"

    @classmethod
    def fields_from_row(cls, row):
        fields = {name: getattr(row, name) for name in COLUMNS}
        if fields['b'] == math.inf:
            fields['b'] = None
        return fields

    def values(self):
        """Column values in CSV order, continuous phases as ``inf``."""
        values = [getattr(self, name) for name in COLUMNS]
        values[COLUMNS.index('b')] = 'inf' if self.b is None else self.b
        return values


COLUMNS = (
    'experiment', 'scenario', 'scheme', 'user', 'rho_db', 'b', 'K', 'N', 'trials', 'failures',
    'p_hat', 'ci_low', 'ci_high', 'analytic_upper', 'analytic_lower', 'diversity',
)
