from marshmallow import Schema, ValidationError, fields, validate, validates_schema

from robridge.settings import PRIMITIVE_TYPES


def _positive(values) -> bool:
    return all(v > 0 for v in values)


class ArticulationSchema(Schema):
    joint = fields.Str(required=True, validate=validate.OneOf(["prismatic", "revolute"]))
    axis = fields.List(fields.Float(), required=True, validate=validate.Length(equal=3))
    range = fields.List(fields.Float(), required=True, validate=validate.Length(equal=2))
    coordinate = fields.Float(required=True)
    mode = fields.Str(required=True, validate=validate.OneOf(["grip", "contact"]))

    @validates_schema
    def validate_bounds(self, data, **kwargs):
        lo, hi = data["range"]
        if lo > hi:
            raise ValidationError(f"range lo > hi: {data['range']!r}", "range")
        if not lo <= data["coordinate"] <= hi:
            raise ValidationError("coordinate outside range", "coordinate")
        norm = sum(a * a for a in data["axis"]) ** 0.5
        if abs(norm - 1.0) > 1e-9:
            raise ValidationError(f"axis is not unit length: {norm}", "axis")


class EntitySchema(Schema):
    id = fields.Integer(required=True, validate=validate.Range(min=0))
    name = fields.Str(required=True, validate=validate.Length(min=1))
    shape = fields.Str(required=True, validate=validate.OneOf(["box", "cylinder"]))
    dims = fields.List(fields.Float(), required=True, validate=_positive)
    color = fields.List(
        fields.Integer(validate=validate.Range(min=0, max=255)),
        required=True,
        validate=validate.Length(equal=3),
    )
    pose = fields.List(fields.Float(), required=True, validate=validate.Length(equal=4))
    graspable = fields.Boolean(required=True)
    solid = fields.Boolean(required=True)
    on = fields.Str(required=True, allow_none=True)
    articulation = fields.Nested(ArticulationSchema, required=True, allow_none=True)

    @validates_schema
    def validate_dims(self, data, **kwargs):
        expected = 3 if data["shape"] == "box" else 2
        if len(data["dims"]) != expected:
            raise ValidationError(
                f"{data['shape']} needs {expected} dims, got {len(data['dims'])}", "dims"
            )


class PrimitiveActionSchema(Schema):
    type = fields.Str(required=True, validate=validate.OneOf(PRIMITIVE_TYPES))
    obj = fields.Str(required=True, validate=validate.Length(min=1))
    des = fields.Str(required=True, allow_none=True)

    @validates_schema
    def validate_destination(self, data, **kwargs):
        if data.get("des") is not None and data["type"] != "place":
            raise ValidationError(f"{data['type']} does not take a destination", "des")
