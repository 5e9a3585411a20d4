"""
Management command listing the built-in type A families.
"""
from django.core.management.base import BaseCommand

from susy.presets import list_presets


class Command(BaseCommand):
    help = 'List preset families, their parameters and constraints'

    def handle(self, *args, **options):
        self.stdout.write(list_presets())
