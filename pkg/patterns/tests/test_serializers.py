from django.test import SimpleTestCase

from patterns.api.serializers import (
    EstimatorArgsSerializer, ManifestEntrySerializer, PatternFileSerializer, PhaseSerializer, WTrickArgsSerializer,
)
from patterns.estimation import Mode


class PatternFileSerializerTests(SimpleTestCase):

    def test_builds_pattern(self):
        serializer = PatternFileSerializer(data={'r': 1, 'd': 1, 'polys': ["0", "m", "2*m"]}, context={'N': 10})
        self.assertTrue(serializer.is_valid(), serializer.errors)
        spec = serializer.save()
        self.assertEqual(spec.k, 3)
        self.assertEqual(spec.N, 10)
        self.assertIsNone(spec.M)

    def test_degree_above_d(self):
        serializer = PatternFileSerializer(data={'r': 1, 'd': 1, 'polys': ["0", "m^2"]})
        self.assertFalse(serializer.is_valid())
        self.assertIn('non_field_errors', serializer.errors)

    def test_unparsable_polynomial(self):
        serializer = PatternFileSerializer(data={'r': 1, 'd': 1, 'polys': ["m + ?"]})
        self.assertFalse(serializer.is_valid())

    def test_required_fields(self):
        serializer = PatternFileSerializer(data={'polys': []})
        self.assertFalse(serializer.is_valid())
        self.assertEqual(set(serializer.errors), {'r', 'd', 'polys'})


class ArgumentSerializerTests(SimpleTestCase):

    def test_estimator_defaults(self):
        serializer = EstimatorArgsSerializer(data={'mode': 'mc', 'samples': 10, 'seed': None})
        self.assertTrue(serializer.is_valid(), serializer.errors)
        cfg = serializer.save()
        self.assertIs(cfg.mode, Mode.MONTE_CARLO)
        self.assertEqual(cfg.samples, 10)
        self.assertEqual(cfg.rng_seed, 1729)

    def test_estimator_rejects_bad_values(self):
        self.assertFalse(EstimatorArgsSerializer(data={'mode': 'fast'}).is_valid())
        self.assertFalse(EstimatorArgsSerializer(data={'workers': 0}).is_valid())

    def test_wtrick_needs_exactly_one_level(self):
        self.assertFalse(WTrickArgsSerializer(data={'w': 3, 'N': 100}).is_valid())
        self.assertFalse(WTrickArgsSerializer(data={'w': 3, 'N': 100, 'R': 5, 'kappa': 0.5}).is_valid())
        serializer = WTrickArgsSerializer(data={'w': 3, 'N': 10**6, 'kappa': 0.5})
        self.assertTrue(serializer.is_valid(), serializer.errors)
        self.assertEqual(serializer.save().R, 1000)

    def test_phase_dims(self):
        serializer = PhaseSerializer(data={'poly': "n1*n2", 'dims': [5, 5]})
        self.assertTrue(serializer.is_valid(), serializer.errors)
        self.assertEqual(serializer.validated_data['phase'].arity, 2)


class ManifestEntrySerializerTests(SimpleTestCase):

    def test_defaults(self):
        serializer = ManifestEntrySerializer(data={'command': 'beta', 'expected': 1})
        self.assertTrue(serializer.is_valid(), serializer.errors)
        entry = serializer.validated_data
        self.assertEqual(entry['name'], 'beta')
        self.assertEqual(entry['field'], 'value')
        self.assertEqual(entry['check'], 'approx')
        self.assertEqual(entry['tolerance'], 0.0)

    def test_reference_checks_need_reference(self):
        serializer = ManifestEntrySerializer(data={'command': 'nu', 'check': 'ratio_to_reference'})
        self.assertFalse(serializer.is_valid())
        serializer = ManifestEntrySerializer(data={'command': 'nu', 'check': 'identical_to_reference',
                                                   'reference': {'args': {'workers': 2}}})
        self.assertTrue(serializer.is_valid(), serializer.errors)
