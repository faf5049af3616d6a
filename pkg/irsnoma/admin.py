from django.contrib import admin
from django.http import HttpResponse

from irsnoma.export import XLSX_CONTENT_TYPE, build_workbook
from irsnoma.models import ExperimentRun, SweepResult


class SweepResultInline(admin.TabularInline):
    model = SweepResult
    extra = 0
    can_delete = False
    fields = ['position', 'scheme', 'user', 'rho_db', 'b', 'K', 'trials', 'failures',
              'p_hat', 'ci_low', 'ci_high', 'analytic_upper', 'analytic_lower', 'diversity']
    readonly_fields = fields


@admin.register(ExperimentRun)
class ExperimentRunAdmin(admin.ModelAdmin):
    list_display = ['created', 'kind', 'scenario', 'seed', 'trials', 'rows_written', 'has_notes']
    list_filter = ['kind', 'scenario', 'created']
    search_fields = ['config_path', 'output_path', 'notes']
    readonly_fields = ['created', 'modified']
    inlines = [SweepResultInline]

    fieldsets = (
        (None, {'fields': ('kind', 'scenario', 'seed', 'trials')}),
        ('Files', {'fields': ('config_path', 'output_path', 'rows_written')}),
        ('Outcome', {'fields': ('notes', 'fits', 'created', 'modified')}),
    )

    actions = ['export_xlsx']

    @admin.display(boolean=True)
    def has_notes(self, obj):
        return obj.has_notes

    @admin.action(description='Export selected runs to Excel')
    def export_xlsx(self, request, queryset):
        wb = build_workbook(queryset.prefetch_related('results'))
        response = HttpResponse(content_type=XLSX_CONTENT_TYPE)
        response['Content-Disposition'] = 'attachment; filename="runs.xlsx"'
        wb.save(response)
        return response
