from pathlib import Path

import pandas as pd
from django.core.management.base import BaseCommand

from runs.artifacts import write_csv
from waveform.golay import training_field


class Command(BaseCommand):
    help = 'Writes the 3328-sample SC PHY training field as a one-column CSV (header "sample")'

    def add_arguments(self, parser):
        parser.add_argument('--out', help='Directory for preamble.csv; stdout when omitted')

    def handle(self, *args, **options):
        preamble = training_field()
        table = pd.DataFrame({'sample': preamble.samples.astype(int)})

        if not options.get('out'):
            self.stdout.write(table.to_csv(index=False, lineterminator='\n'), ending='')
            return

        path = write_csv(Path(options['out']) / 'preamble.csv', table)
        self.stdout.write(self.style.SUCCESS(f'✓ Training field written to {path} ({len(preamble)} samples)'))
