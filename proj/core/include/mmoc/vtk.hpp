#pragma once

#include <string>
#include <vector>

#include "mmoc/field.hpp"

namespace mmoc::fem {

/// Legacy ASCII VTK writer: finest-level micro-elements as an unstructured
/// grid with one point-data array. Vector fields write a VECTORS array.
void write_vtk(const std::string& path, const mesh::MeshHierarchy& h, const std::string& name,
               const ScalarField& field);
void write_vtk(const std::string& path, const mesh::MeshHierarchy& h, const std::string& name,
               const VectorField& field);

}  // namespace mmoc::fem
