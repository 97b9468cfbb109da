from django.db import models

TEMPLATE_CHOICES = (
    ('ellipsoid', 'Ellipsoid'),
    ('polyset', 'Polyset'),
    ('piecewise', 'Piecewise semi-ellipsoid'),
)

STATUS_CHOICES = (
    ('optimal', 'Optimal and verified'),
    ('solved-unverified', 'Solved, verification failed'),
    ('infeasible', 'Infeasible'),
    ('unbounded', 'Unbounded'),
    ('numerical-failure', 'Numerical failure'),
)


class SynthesisRun(models.Model):
    """One solve of a synthesis problem, as written to its solution file."""
    label = models.CharField(max_length=255, blank=True)
    template = models.CharField(max_length=20, choices=TEMPLATE_CHOICES)
    parameters = models.JSONField(default=dict)    # template as_dict(), partition included
    gamma = models.FloatField(blank=True, null=True)
    status = models.CharField(max_length=20, choices=STATUS_CHOICES)
    verified = models.BooleanField(default=False)
    fingerprint = models.CharField(max_length=64)   # sha256 of the program dump
    solve_seconds = models.FloatField(default=0.0)
    solution = models.JSONField(default=dict)
    date_added = models.DateTimeField(auto_now_add=True)

    class Meta:
        ordering = ('-date_added', '-id')

    def __str__(self):
        gamma = 'n/a' if self.gamma is None else f'{self.gamma:.4f}'
        return f'{self.label or self.template} [{self.status}] gamma={gamma}'
