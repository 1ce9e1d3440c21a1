#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "scarecrow/dataset.hpp"

namespace scarecrow {

namespace {

using Code = VocError::Code;

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

const xml::Element& require(const xml::Element& parent, std::string_view name, Code code) {
  const xml::Element* c = parent.child(name);
  if (c == nullptr) {
    throw VocError(code, "<" + parent.name + "> is missing <" + std::string(name) + ">", parent.pos);
  }
  return *c;
}

double number(const xml::Element& el) {
  const std::string_view t = trim(el.text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v)) {
    throw VocError(Code::bad_number,
                   "<" + el.name + "> holds '" + std::string(t) + "', not a number", el.pos);
  }
  return v;
}

int dimension(const xml::Element& el) {
  const double v = number(el);
  if (v < 1.0 || v != std::floor(v) || v > 1e6) {
    throw VocError(Code::bad_size, "<" + el.name + "> must be a positive integer", el.pos);
  }
  return static_cast<int>(v);
}

std::string format_coord(double v) {
  if (v == std::floor(v) && std::abs(v) < 1e15) {
    return std::to_string(static_cast<long long>(v));
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  std::string s(buf);
  while (!s.empty() && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}

}  // namespace

AnnotatedImage parse_voc_xml(std::string_view text) {
  xml::Element root;
  try {
    root = xml::parse(text);
  } catch (const xml::ParseError& e) {
    // Strip the position prefix that VocError adds back.
    std::string msg = e.what();
    const auto colon = msg.find(": ");
    if (colon != std::string::npos) msg = msg.substr(colon + 2);
    throw VocError(Code::malformed_xml, "malformed XML: " + msg, e.position());
  }
  if (root.name != "annotation") {
    throw VocError(Code::wrong_root, "root element is <" + root.name + ">, expected <annotation>",
                   root.pos);
  }

  AnnotatedImage a;
  if (const xml::Element* f = root.child("filename")) a.filename = std::string(trim(f->text));

  const xml::Element& size = require(root, "size", Code::missing_size);
  a.width = dimension(require(size, "width", Code::missing_size));
  a.height = dimension(require(size, "height", Code::missing_size));
  if (const xml::Element* d = size.child("depth")) a.depth = dimension(*d);

  for (const xml::Element* obj : root.children_named("object")) {
    AnnotatedObject o;
    const xml::Element& name = require(*obj, "name", Code::missing_element);
    o.label = std::string(trim(name.text));
    if (o.label.empty()) throw VocError(Code::empty_label, "<name> is empty", name.pos);

    const xml::Element& bb = require(*obj, "bndbox", Code::missing_element);
    o.box.xmin = number(require(bb, "xmin", Code::missing_element));
    o.box.ymin = number(require(bb, "ymin", Code::missing_element));
    o.box.xmax = number(require(bb, "xmax", Code::missing_element));
    o.box.ymax = number(require(bb, "ymax", Code::missing_element));
    if (!(o.box.xmax > o.box.xmin) || !(o.box.ymax > o.box.ymin)) {
      throw VocError(Code::degenerate_box,
                     "box " + to_string(o.box) + " of '" + o.label + "' has no extent", bb.pos);
    }
    if (o.box.xmin < 0 || o.box.ymin < 0 || o.box.xmax > a.width || o.box.ymax > a.height) {
      throw VocError(Code::box_out_of_bounds,
                     "box " + to_string(o.box) + " of '" + o.label + "' lies outside the " +
                         std::to_string(a.width) + "x" + std::to_string(a.height) + " image",
                     bb.pos);
    }
    a.objects.push_back(std::move(o));
  }
  return a;
}

std::string serialize_voc(const AnnotatedImage& a) {
  std::ostringstream os;
  os << "<annotation>\n"
     << "\t<folder>images</folder>\n"
     << "\t<filename>" << xml::escape(a.filename) << "</filename>\n"
     << "\t<size>\n"
     << "\t\t<width>" << a.width << "</width>\n"
     << "\t\t<height>" << a.height << "</height>\n"
     << "\t\t<depth>" << a.depth << "</depth>\n"
     << "\t</size>\n"
     << "\t<segmented>0</segmented>\n";
  for (const AnnotatedObject& o : a.objects) {
    os << "\t<object>\n"
       << "\t\t<name>" << xml::escape(o.label) << "</name>\n"
       << "\t\t<pose>Unspecified</pose>\n"
       << "\t\t<truncated>0</truncated>\n"
       << "\t\t<difficult>0</difficult>\n"
       << "\t\t<bndbox>\n"
       << "\t\t\t<xmin>" << format_coord(o.box.xmin) << "</xmin>\n"
       << "\t\t\t<ymin>" << format_coord(o.box.ymin) << "</ymin>\n"
       << "\t\t\t<xmax>" << format_coord(o.box.xmax) << "</xmax>\n"
       << "\t\t\t<ymax>" << format_coord(o.box.ymax) << "</ymax>\n"
       << "\t\t</bndbox>\n"
       << "\t</object>\n";
  }
  os << "</annotation>\n";
  return os.str();
}

}  // namespace scarecrow
