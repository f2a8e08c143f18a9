import math

from django.db import models


class RunRecord(models.Model):
    STATUS_CHOICES = [
        ('ok', 'Completed'),
        ('failed', 'Failed'),
    ]

    label = models.CharField(max_length=100, blank=True)
    seed = models.PositiveBigIntegerField()
    output_dir = models.CharField(max_length=500)
    config = models.JSONField(default=dict)
    status = models.CharField(max_length=20, choices=STATUS_CHOICES, default='ok')
    n_hat_p = models.PositiveIntegerField(default=0)
    delay_set_f1 = models.FloatField(null=True, blank=True)
    doppler_rmse_hz = models.FloatField(null=True, blank=True)
    v_hat_mps = models.FloatField(null=True, blank=True)
    v_err_pct = models.FloatField(null=True, blank=True)
    image_peak_match_count = models.PositiveIntegerField(default=0)
    created_at = models.DateTimeField(auto_now_add=True)

    class Meta:
        ordering = ['-created_at', '-id']

    def __str__(self):
        return f"Run {self.label or self.pk} (seed {self.seed})"

    @classmethod
    def from_manifest(cls, manifest, output_dir, label='', n_hat_p=0):
        """Store a written run; ``manifest`` is a RunManifest."""
        payload = manifest.to_payload()
        return cls.objects.create(
            label=label,
            seed=manifest.seed,
            output_dir=str(output_dir),
            config=payload['config'],
            n_hat_p=n_hat_p,
            **{name: value for name, value in payload['metrics'].items()}
        )

    def metrics(self):
        return {
            'delay_set_f1': self.delay_set_f1,
            'doppler_rmse_hz': self.doppler_rmse_hz,
            'v_hat_mps': self.v_hat_mps,
            'v_err_pct': self.v_err_pct,
            'image_peak_match_count': self.image_peak_match_count,
        }


class SweepRecord(models.Model):
    param = models.CharField(max_length=50)
    values = models.JSONField(default=list)
    trials_per_value = models.PositiveIntegerField(default=1)
    base_seed = models.PositiveBigIntegerField()
    config = models.JSONField(default=dict)
    output_dir = models.CharField(max_length=500, blank=True)
    created_at = models.DateTimeField(auto_now_add=True)

    class Meta:
        ordering = ['-created_at', '-id']

    def __str__(self):
        return f"Sweep of {self.param} over {len(self.values)} value(s)"


class SweepTrial(models.Model):
    sweep = models.ForeignKey(SweepRecord, on_delete=models.CASCADE, related_name='trials')
    index = models.PositiveIntegerField()
    value = models.CharField(max_length=50)
    trial = models.PositiveIntegerField()
    seed = models.PositiveBigIntegerField()
    status = models.CharField(max_length=50, default='ok')
    delay_set_f1 = models.FloatField(null=True, blank=True)
    doppler_rmse_hz = models.FloatField(null=True, blank=True)
    v_hat_mps = models.FloatField(null=True, blank=True)
    v_err_pct = models.FloatField(null=True, blank=True)
    image_peak_match_count = models.PositiveIntegerField(default=0)

    class Meta:
        ordering = ['sweep', 'index']
        unique_together = ['sweep', 'index']

    def __str__(self):
        return f"{self.sweep.param}={self.value} trial {self.trial}"


def _finite(value):
    value = float(value)
    return value if math.isfinite(value) else None


def record_sweep(result, config, output_dir=''):
    """Store a SweepResult and one SweepTrial per row of its trials table."""
    sweep = SweepRecord.objects.create(
        param=result.param,
        values=[str(v) for v in result.values],
        trials_per_value=int(result.trials['trial'].max()) + 1,
        base_seed=result.base_seed,
        config=config,
        output_dir=str(output_dir),
    )
    SweepTrial.objects.bulk_create([
        SweepTrial(
            sweep=sweep,
            index=int(row.index),
            value=str(row.value),
            trial=int(row.trial),
            seed=int(row.seed),
            status=row.status,
            delay_set_f1=_finite(row.delay_set_f1),
            doppler_rmse_hz=_finite(row.doppler_rmse_hz),
            v_hat_mps=_finite(row.v_hat_mps),
            v_err_pct=_finite(row.v_err_pct),
            image_peak_match_count=int(row.image_peak_match_count),
        )
        for row in result.trials.itertuples(index=False)
    ])
    return sweep
