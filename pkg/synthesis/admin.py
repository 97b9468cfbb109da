from django.contrib import admin

from .models import SynthesisRun


@admin.register(SynthesisRun)
class SynthesisRunAdmin(admin.ModelAdmin):
    list_display = ('label', 'template', 'gamma', 'status', 'verified', 'solve_seconds', 'date_added')
    list_filter = ('template', 'status', 'verified')
    search_fields = ('label', 'fingerprint')
    readonly_fields = ('date_added',)
