from django.contrib import admin
from .models import RunRecord, SweepRecord, SweepTrial


@admin.register(RunRecord)
class RunRecordAdmin(admin.ModelAdmin):
    list_display = ['id', 'label', 'seed', 'status', 'n_hat_p', 'delay_set_f1', 'v_hat_mps', 'v_err_pct',
                    'image_peak_match_count', 'created_at']
    list_filter = ['status', 'created_at']
    search_fields = ['label', 'output_dir']
    readonly_fields = ['created_at']


class SweepTrialInline(admin.TabularInline):
    model = SweepTrial
    extra = 0
    readonly_fields = ['index', 'value', 'trial', 'seed', 'status', 'delay_set_f1', 'v_err_pct',
                       'image_peak_match_count']


@admin.register(SweepRecord)
class SweepRecordAdmin(admin.ModelAdmin):
    list_display = ['id', 'param', 'trials_per_value', 'base_seed', 'created_at']
    list_filter = ['param', 'created_at']
    search_fields = ['param']
    readonly_fields = ['created_at']
    inlines = [SweepTrialInline]


@admin.register(SweepTrial)
class SweepTrialAdmin(admin.ModelAdmin):
    list_display = ['sweep', 'value', 'trial', 'seed', 'status', 'v_err_pct']
    list_filter = ['status', 'sweep__param']
    search_fields = ['value', 'status']
