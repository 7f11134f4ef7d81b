/** Small helpers for building screens without a framework. */

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  children: (Node | string)[] = [],
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    if (key === "text") {
      node.textContent = value;
    } else {
      node.setAttribute(key, value);
    }
  }
  for (const child of children) {
    node.append(child);
  }
  return node;
}

export function clear(node: HTMLElement): void {
  node.innerHTML = "";
}

/** A labeled radio group; returns the wrapper and a reader for the checked value. */
export function radioGroup(
  name: string,
  legendText: string,
  options: { value: string; label: string; note?: string }[],
  checked?: string,
): { fieldset: HTMLFieldSetElement; value: () => string | null } {
  const fieldset = el("fieldset", { class: "radio-group" });
  fieldset.append(el("legend", { text: legendText }));
  for (const option of options) {
    const id = `${name}-${option.value}`;
    const input = el("input", { type: "radio", name, id, value: option.value });
    if (checked === option.value) input.checked = true;
    const label = el("label", { for: id }, [option.label]);
    const row = el("div", { class: "radio-row" }, [input, label]);
    if (option.note) {
      row.append(el("p", { class: "radio-note", text: option.note }));
    }
    fieldset.append(row);
  }
  const value = () => {
    const hit = fieldset.querySelector<HTMLInputElement>(`input[name="${name}"]:checked`);
    return hit ? hit.value : null;
  };
  return { fieldset, value };
}
