# Generated by Django 4.2.7 on 2026-10-18 09:00

from django.db import migrations, models
import django.db.models.deletion


class Migration(migrations.Migration):

    initial = True

    dependencies = []

    operations = [
        migrations.CreateModel(
            name="RunRecord",
            fields=[
                (
                    "id",
                    models.BigAutoField(
                        auto_created=True,
                        primary_key=True,
                        serialize=False,
                        verbose_name="ID",
                    ),
                ),
                ("label", models.CharField(blank=True, max_length=100)),
                ("seed", models.PositiveBigIntegerField()),
                ("output_dir", models.CharField(max_length=500)),
                ("config", models.JSONField(default=dict)),
                (
                    "status",
                    models.CharField(
                        choices=[("ok", "Completed"), ("failed", "Failed")],
                        default="ok",
                        max_length=20,
                    ),
                ),
                ("n_hat_p", models.PositiveIntegerField(default=0)),
                ("delay_set_f1", models.FloatField(blank=True, null=True)),
                ("doppler_rmse_hz", models.FloatField(blank=True, null=True)),
                ("v_hat_mps", models.FloatField(blank=True, null=True)),
                ("v_err_pct", models.FloatField(blank=True, null=True)),
                ("image_peak_match_count", models.PositiveIntegerField(default=0)),
                ("created_at", models.DateTimeField(auto_now_add=True)),
            ],
            options={
                "ordering": ["-created_at", "-id"],
            },
        ),
        migrations.CreateModel(
            name="SweepRecord",
            fields=[
                (
                    "id",
                    models.BigAutoField(
                        auto_created=True,
                        primary_key=True,
                        serialize=False,
                        verbose_name="ID",
                    ),
                ),
                ("param", models.CharField(max_length=50)),
                ("values", models.JSONField(default=list)),
                ("trials_per_value", models.PositiveIntegerField(default=1)),
                ("base_seed", models.PositiveBigIntegerField()),
                ("config", models.JSONField(default=dict)),
                ("output_dir", models.CharField(blank=True, max_length=500)),
                ("created_at", models.DateTimeField(auto_now_add=True)),
            ],
            options={
                "ordering": ["-created_at", "-id"],
            },
        ),
        migrations.CreateModel(
            name="SweepTrial",
            fields=[
                (
                    "id",
                    models.BigAutoField(
                        auto_created=True,
                        primary_key=True,
                        serialize=False,
                        verbose_name="ID",
                    ),
                ),
                ("index", models.PositiveIntegerField()),
                ("value", models.CharField(max_length=50)),
                ("trial", models.PositiveIntegerField()),
                ("seed", models.PositiveBigIntegerField()),
                ("status", models.CharField(default="ok", max_length=50)),
                ("delay_set_f1", models.FloatField(blank=True, null=True)),
                ("doppler_rmse_hz", models.FloatField(blank=True, null=True)),
                ("v_hat_mps", models.FloatField(blank=True, null=True)),
                ("v_err_pct", models.FloatField(blank=True, null=True)),
                ("image_peak_match_count", models.PositiveIntegerField(default=0)),
                (
                    "sweep",
                    models.ForeignKey(
                        on_delete=django.db.models.deletion.CASCADE,
                        related_name="trials",
                        to="runs.sweeprecord",
                    ),
                ),
            ],
            options={
                "ordering": ["sweep", "index"],
                "unique_together": {("sweep", "index")},
            },
        ),
    ]
