import java.util.ArrayList;
import java.util.List;
import java.util.Map;
import java.util.TreeMap;

import org.junit.Test;

public class GenericsTest {

    private <T extends Comparable<T>> T max(List<? extends T> items) {
        T best = null;
        for (T item : items) {
            if (best == null || item.compareTo(best) > 0) {
                best = item;
            }
        }
        return best;
    }

    @Test
    public void genericHelpers() {
        Map<String, List<Integer>> groups = new TreeMap<>();
        groups.computeIfAbsent("a", k -> new ArrayList<>()).add(3);
        List<List<String>> nested = new ArrayList<List<String>>();
        nested.add(new ArrayList<>());
        assertEquals(Integer.valueOf(3), max(groups.get("a")));
        assertEquals(1, nested.size());
        assertEquals("b", Collections.<String>max(List.of("a", "b")));
    }
}
